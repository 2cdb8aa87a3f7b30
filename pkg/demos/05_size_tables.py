# Monte Carlo size tables: rejection rates of the zero-effect test at the
# 10% level across designs, estimators, and dependence levels.
#
# With the default quick settings this runs in well under a minute; pass a
# replication count (e.g. 5000) as the first argument to reproduce
# table-quality numbers.
#
#   python3 demos/05_size_tables.py 5000

import csv
import sys
import time

import synthconf as sc

n_reps = int(sys.argv[1]) if len(sys.argv) > 1 else 500

estimators = {
    "did": sc.EstimatorSpec.did(),
    "sc": sc.EstimatorSpec.sc(),
    "classo": sc.EstimatorSpec.classo(),
}

# A representative subset: stationary i.i.d. data, persistent data, and
# trending factors (where equal-weight misspecification breaks down).
cells = [
    ("iid",      dict(rho_u=0.0, rho_eps=0.0, factor_trend="stationary"), "DGP2", 20, 50),
    ("iid",      dict(rho_u=0.0, rho_eps=0.0, factor_trend="stationary"), "DGP3", 50, 50),
    ("rho=0.6",  dict(rho_u=0.6, rho_eps=0.6, factor_trend="stationary"), "DGP2", 20, 50),
    ("trending", dict(rho_u=0.0, rho_eps=0.0, factor_trend="trending"),  "DGP2", 50, 50),
]

rows = []
start = time.perf_counter()
print(f"{n_reps} replications per cell\n")
print(f"{'design':>9} {'dgp':>5} {'T0':>4} {'J':>4} " + "".join(f"{n:>9}" for n in estimators))
for label, params, dgp_kind, t0, n_controls in cells:
    rates = []
    for name, est in estimators.items():
        dgp = sc.DgpSpec(t0=t0, n_controls=n_controls, weights_kind=dgp_kind,
                         seed=2026, **params)
        result = sc.run_size_experiment(dgp, est, n_reps=n_reps)
        rates.append(result.rejection_rate)
        rows.append({"design": label, "dgp": dgp_kind, "t0": t0, "n_controls": n_controls,
                     "estimator": name, "rejection_rate": result.rejection_rate,
                     "n_reps": n_reps})
    print(f"{label:>9} {dgp_kind:>5} {t0:>4} {n_controls:>4} "
          + "".join(f"{r:9.3f}" for r in rates))

print(f"\nelapsed: {time.perf_counter() - start:.1f}s")
print("note the trending row: equal weights (did) over-reject badly while the")
print("l1-constrained fit stays on level.")

with open("size_table.csv", "w", newline="") as fh:
    writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
    writer.writeheader()
    writer.writerows(rows)
print("wrote size_table.csv")
