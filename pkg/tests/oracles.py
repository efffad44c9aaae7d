"""Slow reference evaluators written without the package's matching/AP code.

Box overlap is recomputed from raw coordinates, the number of matched
members is found by enumerating injections, and AP comes from the explicit
precision/recall walk in ``synthkit.brute_force_ap``.
"""

from hideval.synthkit import brute_force_ap, brute_force_max_matches


def raw_iou(a, b):
    ax1, ay1, ax2, ay2 = a.x1, a.y1, a.x2, a.y2
    bx1, by1, bx2, by2 = b.x1, b.y1, b.x2, b.y2
    w = min(ax2, bx2) - max(ax1, bx1)
    h = min(ay2, by2) - max(ay1, by1)
    if w <= 0 or h <= 0:
        return 0.0
    inter = w * h
    return inter / ((ax2 - ax1) * (ay2 - ay1) + (bx2 - bx1) * (by2 - by1) - inter)


def ref_group_iou(gt_boxes, pred_boxes, floor=0.5):
    qualified = [[raw_iou(a, b) >= floor for b in pred_boxes] for a in gt_boxes]
    r = brute_force_max_matches(qualified)
    return r / (len(gt_boxes) + len(pred_boxes) - r)


def _by_key(frames):
    return {f.key: f for f in frames}


def ref_group_ap(gt_frames, pred_frames, delta):
    gts, preds = _by_key(gt_frames), _by_key(pred_frames)
    keys = sorted(gts)
    ranked = []
    for key in keys:
        p = preds.get(key)
        if p is None:
            continue
        for b, g in enumerate(p.groups):
            ranked.append((-g.score, key, b))
    ranked.sort()
    claimed = {k: set() for k in keys}
    flags = []
    for _, key, b in ranked:
        gt, p = gts[key], preds[key]
        pb = [p.persons[i].box for i in p.groups[b].members]
        best, best_v = None, -1.0
        for a, members in enumerate(gt.groups):
            if a in claimed[key]:
                continue
            v = ref_group_iou([gt.persons[i].box for i in members], pb)
            if v >= delta and v > best_v:
                best, best_v = a, v
        if best is not None:
            claimed[key].add(best)
        flags.append(best is not None)
    num_gt = sum(len(gts[k].groups) for k in keys)
    return brute_force_ap(flags, num_gt), flags


def ref_class_ap(gt_frames, pred_frames, k, thr=0.5):
    gts, preds = _by_key(gt_frames), _by_key(pred_frames)
    keys = sorted(gts)
    ranked = []
    for key in keys:
        p = preds.get(key)
        if p is None:
            continue
        for j, person in enumerate(p.persons):
            s = person.action_scores[k]
            if s > 0:
                ranked.append((-s, key, j))
    ranked.sort()
    claimed = {key: set() for key in keys}
    flags = []
    for _, key, j in ranked:
        best, best_v = None, -1.0
        for i, person in enumerate(gts[key].persons):
            if k not in person.actions or i in claimed[key]:
                continue
            v = raw_iou(person.box, preds[key].persons[j].box)
            if v >= thr and v > best_v:
                best, best_v = i, v
        if best is not None:
            claimed[key].add(best)
        flags.append(best is not None)
    num_gt = sum(1 for key in keys for p in gts[key].persons if k in p.actions)
    return brute_force_ap(flags, num_gt), num_gt
