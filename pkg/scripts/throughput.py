"""Time dataset generation, parsing and evaluation at a given scale."""

import argparse
import tempfile
import time
from pathlib import Path

from hideval.dataio import read_dataset, write_dataset
from hideval.report import evaluate
from hideval.synthkit import ScenarioSpec, generate


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--frames", type=int, default=10_000)
    ap.add_argument("--workers", type=int, nargs="+", default=[1])
    ap.add_argument("--seed", type=int, default=10)
    args = ap.parse_args()

    spec = ScenarioSpec(
        seed=args.seed, num_frames=args.frames, people=(1, 15), groups=(0, 4),
        jitter=0.02, corruption=0.2, noise=0.3, num_videos=max(1, args.frames // 200),
    )
    t0 = time.perf_counter()
    gt, pred = generate(spec)
    print(f"generate  {time.perf_counter() - t0:6.2f}s  ({args.frames} frames)")

    with tempfile.TemporaryDirectory() as tmp:
        gt_path, pred_path = Path(tmp) / "gt.jsonl", Path(tmp) / "pred.jsonl"
        write_dataset(gt_path, gt)
        write_dataset(pred_path, pred)
        t0 = time.perf_counter()
        meta, gt = read_dataset(gt_path, "gt")
        _, pred = read_dataset(pred_path, "pred")
        print(f"parse     {time.perf_counter() - t0:6.2f}s")

    for w in args.workers:
        t0 = time.perf_counter()
        report = evaluate(gt, pred, meta=meta, workers=w)
        print(f"evaluate  {time.perf_counter() - t0:6.2f}s  workers={w}  AP^G={report.group_ap.mean:.4f}")


if __name__ == "__main__":
    main()
