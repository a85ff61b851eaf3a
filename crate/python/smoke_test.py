"""Smoke test for the lowfault extension module.

Build and install first, e.g.:

    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/lowfault-*.whl
    python python/smoke_test.py
"""

import math
import sys

import lowfault

JAVA = """
class Point {
    private int x;

    int getX() {
        return x;
    }

    void setX(int x) {
        this.x = x;
    }

    int clamp(int lo, int hi) {
        if (x < lo) {
            return lo;
        }
        return x > hi ? hi : x;
    }
}
"""


def check(cond, what):
    if not cond:
        print(f"FAIL {what}")
        sys.exit(1)
    print(f"ok   {what}")


def main():
    methods = lowfault.analyze_source(JAVA, "Point.java")
    by_name = {m["qualified_name"]: m for m in methods}
    check(len(methods) == 3, "three methods extracted")
    check("Getter" in by_name["Point.getX(0)"]["categories"], "getter recognised")
    check(by_name["Point.clamp(2)"]["cyclomatic"] == 3, "cyclomatic complexity of clamp")

    check(lowfault.compute_tertiles([1, 2, 3, 4, 5, 6]) == (2, 4), "nearest-rank tertiles")

    cfg = lowfault.Config(min_confidence=0.9, cv_folds=5, undersample=False)
    check(cfg.cv_folds == 5 and cfg.min_support == 0.05, "config keys readable")
    check(lowfault.Config.from_toml(cfg.to_toml()) == cfg, "config TOML round trip")
    try:
        lowfault.Config(min_support=2.0)
        check(False, "invalid config rejected")
    except ValueError:
        check(True, "invalid config rejected")

    corpus = lowfault.synthetic_corpus(n_projects=3, seed=7, methods_per_project=(500, 600))
    check(corpus.projects() == ["alpha", "bravo", "charlie"], "synthetic corpus projects")
    again = lowfault.Dataset.from_csv(corpus.to_csv())
    check(len(again) == len(corpus) and again.n_faulty == corpus.n_faulty, "dataset CSV round trip")

    model = lowfault.train(corpus, cfg)
    check(model.n >= 1, f"trained model selects rules (n={model.n})")
    check(model.matched_faulty_share <= cfg.selection_threshold, "selection threshold respected")
    reloaded = lowfault.Model.from_toml(model.to_toml())
    check(reloaded.predict(corpus) == model.predict(corpus), "model TOML round trip keeps verdicts")
    verdicts = model.predict(lowfault.Dataset.from_source(JAVA, "Point.java"))
    check({v["verdict"] for v in verdicts} <= {"LowFaultRisk", "NoClaim"}, "prediction on extracted source")

    within = lowfault.evaluate_within(corpus.project("alpha"), cfg)
    check(len(within) == 6 and within[-1]["scope"] == "aggregate", "within-project rows")
    cross = lowfault.evaluate_cross(corpus, cfg)
    check(len(cross) == 3, "cross-project rows")
    for r in cross:
        rr = r["risk_ratio_methods"]
        print(f"     {r['project']}: {r['pct_methods_lfr']:.1%} of methods low risk, risk ratio {rr}")
        check(rr is not None and (math.isinf(rr) or rr > 1.0), f"{r['project']} low-risk methods are safer")

    try:
        lowfault.evaluate_cross(corpus.project("alpha"), cfg)
        check(False, "cross-project needs two projects")
    except lowfault.LowfaultError:
        check(True, "cross-project needs two projects")
    print("smoke test passed")


if __name__ == "__main__":
    main()
