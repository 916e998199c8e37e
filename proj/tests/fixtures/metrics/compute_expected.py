"""Recomputes expected.json for the metric fixture from first principles."""
import json
from fractions import Fraction as F


def iou(a, b):
    inter = max(F(0), min(b[1], a[1]) - max(b[0], a[0]))
    union = (a[1] - a[0]) + (b[1] - b[0]) - inter
    return inter / union


def ap(ranked, gts, t):
    used, hits, total = set(), 0, F(0)
    for rank, p in enumerate(ranked, 1):
        cands = [(iou(p, g), i) for i, g in enumerate(gts) if i not in used and iou(p, g) >= t]
        if cands:
            used.add(max(cands)[1])
            hits += 1
            total += F(hits, rank)
    return total / len(gts)


def binary_ap(scores, relevant):
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    hits, total = 0, F(0)
    for rank, i in enumerate(order, 1):
        if i in relevant:
            hits += 1
            total += F(hits, rank)
    return total / len(relevant) if relevant else F(0)


def frac(x):
    return F(str(x))


gts = [json.loads(l) for l in open("ground_truth.jsonl")]
preds = {p["qid"]: p for p in map(json.loads, open("predictions.jsonl"))}
rows = []
for g in gts:
    p = preds[g["qid"]]
    windows = [[frac(a), frac(b)] for a, b in g["relevant_windows"]]
    ranked = [[frac(a), frac(b)] for a, b, _ in p["pred_relevant_windows"]]
    rows.append((windows, ranked, p["pred_saliency_scores"], set(g["relevant_clip_ids"])))

n = len(rows)
pct = lambda x: round(float(x * 100), 2)
top1 = [max(iou(r[1][0], w) for w in r[0]) for r in rows]
thresholds = [F(50 + 5 * k, 100) for k in range(10)]
map_at = {t: sum(ap(r[1], r[0], t) for r in rows) / n for t in thresholds}
expected = {
    "r1@0.5": pct(F(sum(1 for v in top1 if v >= F(1, 2)), n)),
    "r1@0.7": pct(F(sum(1 for v in top1 if v >= F(7, 10)), n)),
    "map@0.5": pct(map_at[F(1, 2)]),
    "map@0.75": pct(map_at[F(3, 4)]),
    "map@avg": pct(sum(map_at.values()) / 10),
    "miou": pct(sum(top1) / n),
    "vhd_map": pct(sum(binary_ap(r[2], r[3]) for r in rows) / n),
    "hit@1": pct(F(sum(1 for r in rows if max(range(len(r[2])), key=lambda i: (r[2][i], -i)) in r[3]), n)),
}
print(json.dumps(expected, indent=2))
