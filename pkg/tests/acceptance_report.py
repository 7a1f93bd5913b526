"""Collects one verdict per acceptance criterion for the end-of-session report."""
from __future__ import annotations

TITLES = {
    1: "LP oracle equivalence",
    2: "single-cap reduction cost",
    3: "per-round gap under tight-pair accuracy",
    4: "fairness-loss saturation",
    5: "regret growth",
    6: "known-theta regret flatness",
    7: "confidence-interval coverage",
    8: "width-sum bound",
    9: "martingale bound",
    10: "estimator soundness",
    11: "mistake saturation",
    12: "multi-action sanity",
    13: "reproducibility",
}

# criterion -> list of (part, ok, detail)
RESULTS: dict[int, list[tuple[str, bool, str]]] = {}


def record(criterion: int, ok: bool, detail: str, part: str = "") -> None:
    line = f"C{criterion} {part}: {'PASS' if ok else 'FAIL'} {detail}".replace(" :", ":")
    print(line)
    RESULTS.setdefault(criterion, []).append((part, bool(ok), detail))


def lines() -> list[str]:
    out = []
    for c in sorted(TITLES):
        parts = RESULTS.get(c)
        if not parts:
            out.append(f"C{c:<2} {TITLES[c]}: NOT RUN")
            continue
        ok = all(p[1] for p in parts)
        detail = "; ".join(f"{p[0] + ' ' if p[0] else ''}{'ok' if p[1] else 'FAILED'} ({p[2]})" for p in parts)
        out.append(f"C{c:<2} {TITLES[c]}: {'PASS' if ok else 'FAIL'} - {detail}")
    return out
