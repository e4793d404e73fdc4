"""Command-line surface: segment -> fit -> rollout -> eval / score.

Results go to stdout, diagnostics to stderr. Exit codes: 0 success,
1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import fileio
from .basis import eval_basis
from .config import Config, resolve_config
from .dmp_orientation import fit_orientation, rollout_orientation
from .dmp_position import RolloutConfig, fit_position, position_forcing_targets, rollout_position
from .errors import DomainError, TooFewSamples
from .preprocess import SegmentationConfig, resample_uniform, segment_by_velocity
from .quat import UnitQuat
from .scene import (
    NeedleGeometry,
    error_report,
    mean_generality,
    needle_tip_path,
    score_generality,
    summarize_reports,
)
from .trajectory import TimedPoseTrajectory

# below this many points the explicit Euler step is too coarse for the default gains
MIN_ROLLOUT_POINTS = 10


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="suturelfd", description=__doc__)
    p.add_argument("--config", help="config file path (or set $SUTURELFD_CONFIG)")
    p.add_argument("--profile", choices=["task-ii", "task-iv"], help="hyperparameter profile")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("segment", help="split a recording at velocity dwells")
    sp.add_argument("input")
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--stem", help="output name stem (default: input stem)")

    fp = sub.add_parser("fit", help="fit a paired position+orientation model")
    fp.add_argument("segment")
    fp.add_argument("--out", required=True)

    rp = sub.add_parser("rollout", help="regenerate a trajectory from a model")
    rp.add_argument("model")
    rp.add_argument("--out", required=True)
    rp.add_argument("--start", type=float, nargs=3, metavar=("X", "Y", "Z"))
    rp.add_argument("--goal", type=float, nargs=3, metavar=("X", "Y", "Z"))
    rp.add_argument("--start-quat", type=float, nargs=4, metavar=("V", "UX", "UY", "UZ"))
    rp.add_argument("--goal-quat", type=float, nargs=4, metavar=("V", "UX", "UY", "UZ"))
    rp.add_argument("--points", type=int)
    rp.add_argument("--horizon-scale", type=float, default=1.0)

    ep = sub.add_parser("eval", help="start/goal/trajectory errors of test vs reference")
    ep.add_argument("files", nargs="+", metavar="REF TEST",
                    help="one or more reference/test file pairs")
    ep.add_argument("--json", dest="json_out", help="also write the report as JSON")

    cp = sub.add_parser("score", help="four-level generality score against a scene")
    cp.add_argument("trajectory", nargs="?")
    cp.add_argument("scene", nargs="?")
    cp.add_argument("--pair", help="marker pair name inside the scene file")
    cp.add_argument("--reference", help="reference trajectory for the 0.4 level")
    cp.add_argument("--needle-radius", type=float)
    cp.add_argument("--arc-deg", type=float)
    cp.add_argument("--batch", help="list file: ROW COL TRAJ SCENE PAIR [REF] per line")
    cp.add_argument("--out", help="matrix output file for batch mode")
    return p


def _info(msg):
    print(msg, file=sys.stderr)


# ------------------------------------------------------------------- commands

def _cmd_segment(args, cfg: Config) -> int:
    traj = fileio.read_trajectory(args.input)
    seg_cfg = SegmentationConfig(cfg.speed_threshold, cfg.dwell_min, cfg.min_segment)
    segments = segment_by_velocity(traj, seg_cfg)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = args.stem or Path(args.input).stem

    manifest = [f"#segments v1", f"#source {args.input}"]
    for i, seg in enumerate(segments):
        name = f"{stem}_seg{i:02d}.traj"
        fileio.write_trajectory(out_dir / name, seg)
        manifest.append(
            f"{i} file {name} t0 {seg.stamps[0]:.6f} t1 {seg.stamps[-1]:.6f} "
            f"samples {len(seg)} label {seg.label or '-'}"
        )
        print(f"segment {i}: [{seg.stamps[0]:.3f}, {seg.stamps[-1]:.3f}] s, {len(seg)} samples -> {name}")
    (out_dir / f"{stem}_manifest.txt").write_text("\n".join(manifest) + "\n", encoding="utf-8")
    if not segments:
        _info("warning: no segments found (input never moves above the speed threshold)")
    return 0


def _fit_summary(demo, model):
    """RMS forcing residual per axis after the LWR solve."""
    phases, offsets, f_des = position_forcing_targets(demo, model.alpha_y, model.beta_y, model.alpha_x)
    psi = eval_basis(model.basis, phases)
    mix = psi @ model.weights.T / psi.sum(axis=1, keepdims=True)
    pred = mix * phases[:, None] * offsets[None, :]
    return np.sqrt(np.mean((f_des - pred) ** 2, axis=0))


def _cmd_fit(args, cfg: Config) -> int:
    demo = fileio.read_trajectory(args.segment)
    if len(demo) < 5:
        raise TooFewSamples(f"{args.segment}: need at least 5 samples, got {len(demo)}")
    demo = resample_uniform(demo, cfg.n_pts)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        position = fit_position(demo, cfg.alpha_y, cfg.beta_y, cfg.n_bfs, cfg.alpha_x)
        orientation = fit_orientation(demo, cfg.alpha_z, cfg.beta_z, cfg.n_bfs_o, cfg.alpha_x)

    bundle = fileio.ModelBundle(kind="paired", position=position, orientation=orientation)
    fileio.write_model(args.out, bundle)

    resid = _fit_summary(demo, position)
    print(f"fit: {len(demo)} samples, duration {demo.duration:.3f} s")
    print(f"position: n_bfs {cfg.n_bfs}, forcing residual rms [{resid[0]:.4g}, {resid[1]:.4g}, {resid[2]:.4g}]")
    print(f"orientation: n_bfs {cfg.n_bfs_o}, boundary rotation {np.linalg.norm(orientation.scaling):.4f} rad")
    for w in caught:
        print(f"warning: {w.message}")
    print(f"model written to {args.out}")
    return 0


def _cmd_rollout(args, cfg: Config) -> int:
    n_pts = args.points if args.points is not None else cfg.n_pts
    if n_pts < MIN_ROLLOUT_POINTS:
        raise _UsageError(
            f"--points {n_pts} is insufficient for integration; "
            f"need at least {MIN_ROLLOUT_POINTS} for a stable Euler step at the default gains"
        )
    bundle = fileio.read_model(args.model)
    rc = RolloutConfig(
        n_pts=n_pts,
        horizon_scale=args.horizon_scale,
        start_override=args.start,
        goal_override=args.goal,
        start_quat_override=UnitQuat.from_wxyz(args.start_quat) if args.start_quat else None,
        goal_quat_override=UnitQuat.from_wxyz(args.goal_quat) if args.goal_quat else None,
    )

    positions = stamps = None
    quats = None
    if bundle.position is not None:
        pos_traj = rollout_position(bundle.position, rc)
        positions, stamps = pos_traj.positions, pos_traj.stamps
    if bundle.orientation is not None:
        ori_traj = rollout_orientation(bundle.orientation, rc)
        quats, stamps = ori_traj.orientations, ori_traj.stamps
    if positions is None:
        positions = np.zeros((n_pts, 3))
    out = TimedPoseTrajectory(stamps, positions, quats)
    fileio.write_trajectory(args.out, out)
    print(f"rollout: {n_pts} points over {out.duration:.3f} s -> {args.out}")
    return 0


def _cmd_eval(args, cfg: Config) -> int:
    if len(args.files) % 2 != 0:
        raise _UsageError("eval expects an even number of files: REF TEST [REF TEST ...]")
    pairs = [(args.files[i], args.files[i + 1]) for i in range(0, len(args.files), 2)]
    reports = []
    for ref_path, test_path in pairs:
        ref = fileio.read_trajectory(ref_path)
        test = fileio.read_trajectory(test_path)
        reports.append(error_report(ref, test))

    payload: dict
    if len(reports) == 1:
        r = reports[0]
        for name in r.FIELDS:
            unit = "mm" if name.endswith("pos") else "deg"
            print(f"{name:10s} {getattr(r, name):12.6f} {unit}")
        payload = {name: getattr(r, name) for name in r.FIELDS}
    else:
        summary = summarize_reports(reports)
        print(f"{'field':10s} {'mean':>12s} {'std':>12s} {'median':>12s}")
        for name, row in summary.items():
            print(f"{name:10s} {row['mean']:12.6f} {row['std']:12.6f} {row['median']:12.6f}")
        payload = summary
    if args.json_out:
        Path(args.json_out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return 0


def _pick_scene(path, pair):
    scenes = fileio.read_scene_library(path)
    if pair is None:
        if len(scenes) > 1:
            raise _UsageError(f"{path} holds {len(scenes)} pairs; pick one with --pair")
        return next(iter(scenes.values()))
    if pair not in scenes:
        raise fileio.FormatError(f"{path}: no pair named {pair!r} (have {sorted(scenes)})")
    return scenes[pair]


def _score_one(traj_path, scene_path, pair, ref_path, geom, cfg):
    traj = fileio.read_trajectory(traj_path)
    scene = _pick_scene(scene_path, pair)
    tips = needle_tip_path(traj, geom)
    reference = None
    if ref_path:
        reference = needle_tip_path(fileio.read_trajectory(ref_path), geom)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return score_generality(tips, scene, reference, cfg.reasonable_tol)


def _cmd_score(args, cfg: Config) -> int:
    geom = NeedleGeometry(
        radius=args.needle_radius if args.needle_radius else cfg.needle_radius,
        arc_angle=math.radians(args.arc_deg) if args.arc_deg else cfg.needle_arc,
    )
    if args.batch:
        rows: dict[str, dict[str, float]] = {}
        cols: list[str] = []
        with open(args.batch, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split()
                if len(parts) not in (5, 6):
                    raise fileio.FormatError(
                        f"{args.batch}:{lineno}: expected 'ROW COL TRAJ SCENE PAIR [REF]'")
                row, col, traj_path, scene_path, pair = parts[:5]
                ref = parts[5] if len(parts) == 6 else None
                score = _score_one(traj_path, scene_path, pair, ref, geom, cfg)
                rows.setdefault(row, {})[col] = score.level
                if col not in cols:
                    cols.append(col)
        levels = [v for r in rows.values() for v in r.values()]
        mean = mean_generality(levels)
        lines = ["#generality-matrix v1", "row " + " ".join(cols)]
        for row in rows:
            lines.append(row + " " + " ".join(
                ("%g" % rows[row][c]) if c in rows[row] else "-" for c in cols))
        lines.append(f"mean {mean:.6g}")
        text = "\n".join(lines) + "\n"
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        print(text, end="")
        return 0

    if not args.trajectory or not args.scene:
        raise _UsageError("score needs TRAJECTORY and SCENE (or --batch)")
    score = _score_one(args.trajectory, args.scene, args.pair, args.reference, geom, cfg)
    print(f"level {score.level:g} reason {score.reason.value}")
    return 0


_COMMANDS = {
    "segment": _cmd_segment,
    "fit": _cmd_fit,
    "rollout": _cmd_rollout,
    "eval": _cmd_eval,
    "score": _cmd_score,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        _info(f"usage error: {exc}")
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args.config, args.profile)
        return _COMMANDS[args.command](args, cfg)
    except _UsageError as exc:
        _info(f"usage error: {exc}")
        return 1
    except (fileio.FormatError, DomainError, TooFewSamples, ValueError, OSError) as exc:
        _info(f"error: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
