#!/usr/bin/env python3
"""Reference logistic fits of a feature table with statsmodels.

Predictors are standardized with the population standard deviation; in a
single-lemma scenario the (constant) verb-frequency column is dropped.

    python3 tools/oracle_fit.py FEATURES.csv OUT.json all think
"""

import json
import sys

import numpy as np
import pandas as pd
import statsmodels.api as sm

KEYS = ["mc_length", "mc_verb_frequency", "sc_length", "sc_subject_distance",
        "sc_onset_surprisal", "sc_onset_entropy"]


def fit(df, scenario):
    if scenario != "all":
        df = df[df["main_verb_lemma"].str.lower() == scenario]
    keys = KEYS if scenario == "all" else [k for k in KEYS if k != "mc_verb_frequency"]
    X = df[keys].to_numpy(dtype=float)
    X = (X - X.mean(axis=0)) / X.std(axis=0, ddof=0)
    X = sm.add_constant(X, has_constant="add")
    y = df["label"].to_numpy(dtype=float)
    res = sm.Logit(y, X).fit(method="newton", tol=1e-12, maxiter=200, disp=False)
    ci = res.conf_int(0.05)
    pred = (res.predict(X) >= 0.5).astype(float)
    return {
        "scenario": scenario,
        "n": int(len(y)),
        "predictors": ["const"] + keys,
        "beta": res.params.tolist(),
        "std_error": res.bse.tolist(),
        "ci_low": ci[:, 0].tolist(),
        "ci_high": ci[:, 1].tolist(),
        "p_value": res.pvalues.tolist(),
        "log_likelihood": float(res.llf),
        "accuracy": float((pred == y).mean()),
    }


def main():
    df = pd.read_csv(sys.argv[1])
    out = [fit(df, s) for s in sys.argv[3:]]
    with open(sys.argv[2], "w") as f:
        json.dump(out, f, indent=1)
        f.write("\n")
    for o in out:
        print(o["scenario"], o["n"], np.round(o["beta"], 4), round(o["accuracy"], 4))


if __name__ == "__main__":
    main()
