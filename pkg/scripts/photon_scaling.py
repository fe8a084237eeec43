"""Everett/Copenhagen spin gap and runtime across the three photon paths."""
from collapse_lab.experiments import run_photon_experiment

for n in (1, 2, 4, 8, 10, 12, 16, 20, 100, 10**4, 10**6):
    rep = run_photon_experiment(n)
    e = rep.expectations
    print(f"N={n:<8} path={rep.inputs['path']:<9} everett={e['everett']:<12.6g} "
          f"copenhagen={e['copenhagen']:<10.3g} {rep.runtime * 1e3:9.1f} ms")
