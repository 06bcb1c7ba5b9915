#!/usr/bin/python3
# -*- coding: utf-8 -*

# --- BEGIN COPYRIGHT BLOCK ---
# Copyright (C) 2026 The mvfuse authors.
# All rights reserved.
#
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)
# --- END COPYRIGHT BLOCK ---
#

""" This module is the mvfuse command line front end."""

DOCUMENTATION = r'''
---
module: mvfuse_cli

short_description: Command line front end of mvfuse

description:
    This module allows to:
    - Generate synthetic multi camera sequences (synth).
    - Fuse, refine and score a sequence (run).
    - Score poses produced by any method (evaluate).
    - Run the camera de-synchronization and camera count ablations (ablate-desync, ablate-views).
    - Put several summaries side by side (compare).
version_added: 1.0.0

options:
    Every option of the mvfuse_options table may be set in a YAML config file
    (--config or the MVFUSE_CONFIG environment variable); command line flags win.

author:
    - The mvfuse authors

requirements:
    - python >= 3.9
    - numpy >= 1.22
    - pyyaml
'''

EXAMPLES = r'''
# Generate a 4 camera, 100 frames dataset with 3 occluded views per frame
mvfuse synth --cameras 4 --frames 100 --occluded-views 3 --seed 7 --output data

# Fuse and refine it
mvfuse run --cameras data/cameras.json --sequence data/sequence.jsonl --output run

# Fusion only, naive average control
mvfuse run --cameras data/cameras.json --sequence data/sequence.jsonl --weights-strategy uniform --no-optimize --output naive

# Side by side summary
mvfuse compare run/metrics_summary.csv naive/metrics_summary.csv --output cmp
'''

RETURN = r'''
exit status:
    0: every output was written
    1: runtime error (invalid data, invalid configuration, I/O error)
    2: usage error
stdout:
    human readable summary tables
stderr:
    diagnostics (use -v, -vv, -vvv for more)
'''

### I found fstring more readable than lazy % formatting even if it is a bit slower:
# pylint: disable=logging-fstring-interpolation

import os
import sys
import argparse
import traceback
from pathlib import Path
import numpy as np

from mvfuse.module_utils.mvfuse_util import MvfuseError, ValidationError, get_log, init_log, set_verbosity
from mvfuse.module_utils.mvfuse_options import OPTIONS_BY_NAME, RunConfig
from mvfuse.module_utils.mvfuse_geometry import index_rig
from mvfuse.module_utils.mvfuse_skeleton import default_convention
from mvfuse.module_utils.mvfuse_metrics import aggregate, frame_metrics
from mvfuse.module_utils.mvfuse_synth import generate_sequence, make_rig
from mvfuse.module_utils.mvfuse_pipeline import (PipelineConfig, ablate_desync, ablate_views, drop_views,
                                                 run_sequence, summarize)
from mvfuse.module_utils.mvfuse_io import (load_cameras, load_config, load_convention, load_poses, load_sequence,
                                           read_summary, save_cameras, save_convention, save_manifest, save_poses,
                                           save_sequence, write_metrics, write_table)

CONFIG_ENV = 'MVFUSE_CONFIG'
ABLATION_COLUMNS = ('method', 'count', 'mpjpe_abs_mm', 'mpjpe_rel_mm', 'frames')


class UsageError(MvfuseError):
    """Invalid command line usage (exit status 2)."""


def _option_type(option):
    def convert(val):
        try:
            return option.convert(val)
        except ValidationError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc
    convert.__name__ = option.otype
    return convert


def _add(parser, name, flag=None):
    """Add the flag of an option; unset flags are absent from the namespace."""
    option = OPTIONS_BY_NAME[name]
    kwargs = {'dest': name, 'default': argparse.SUPPRESS, 'help': option.desc}
    if option.otype == 'bool':
        kwargs['action'] = 'store_true'
    else:
        kwargs['type'] = _option_type(option)
        if option.choice:
            kwargs['choices'] = option.choice
    parser.add_argument(flag or option.flag, **kwargs)


def _add_run_flags(parser):
    _add(parser, 'cameras')
    _add(parser, 'sequence')
    _add(parser, 'convention')
    _add(parser, 'weights_strategy')
    _add(parser, 'epsilon')
    _add(parser, 'min_views')
    _add(parser, 'fallback')
    _add(parser, 'lambda_sym')
    _add(parser, 'max_iters')
    parser.add_argument('--no-optimize', dest='optimize', action='store_false', default=argparse.SUPPRESS,
                        help='Skip the refinement (fusion only).')
    _add(parser, 'drop_cameras')
    _add(parser, 'method')
    _add(parser, 'jobs')
    _add(parser, 'exclude_pelvis')
    _add(parser, 'include_clamped')


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', default=None, help=f'YAML config file (default: ${CONFIG_ENV}).')
    _add(common, 'seed')
    _add(common, 'output')
    common.add_argument('-v', '--verbose', action='count', default=0, help='Increase verbosity (-v, -vv, -vvv).')

    parser = argparse.ArgumentParser(prog='mvfuse', description='Occlusion aware multi view 3D human pose fusion.')
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True

    synth = sub.add_parser('synth', parents=[common], help='Generate a synthetic multi camera sequence.')
    _add(synth, 'camera_count', '--cameras')
    for name in ('frames', 'occluded_views', 'sigma_2d', 'sigma_3d', 'sigma_occ', 'ray_scale',
                 'occluded_joint_fraction', 'detection_drop_prob', 'occluder_mode', 'occluders_per_view',
                 'motion', 'label', 'rig_radius', 'rig_height', 'focal_length', 'fov', 'bone_jitter',
                 'root_speed', 'motion_amplitude', 'desync_cameras', 'convention'):
        _add(synth, name)

    run = sub.add_parser('run', parents=[common], help='Fuse, refine and score a sequence.')
    _add_run_flags(run)

    evaluate = sub.add_parser('evaluate', parents=[common], help='Score a poses file against a sequence.')
    for name in ('sequence', 'poses', 'convention', 'exclude_pelvis', 'include_clamped'):
        _add(evaluate, name)

    for command, helptext in (('ablate-desync', 'MPJPE against the number of desynchronized cameras.'),
                              ('ablate-views', 'MPJPE against the number of available cameras.')):
        abl = sub.add_parser(command, parents=[common], help=helptext)
        _add_run_flags(abl)
        _add(abl, 'baseline')

    compare = sub.add_parser('compare', parents=[common], help='Put several summary CSVs side by side.')
    compare.add_argument('inputs', nargs='*', help='Summary CSV files (metrics_summary.csv).')
    compare.add_argument('--names', default=None, help='Comma separated column names (default: the paths).')
    _add(compare, 'metric')
    return parser


def resolve_config(args):
    """defaults < config file < command line."""
    path = args.config or os.getenv(CONFIG_ENV)
    cfg = load_config(path) if path else RunConfig()
    overrides = {name: getattr(args, name) for name in OPTIONS_BY_NAME if hasattr(args, name)}
    cfg.update(overrides)
    get_log().debug(f"resolve_config: config file={path} overrides={overrides}")
    return cfg


def _convention(cfg):
    if cfg.convention:
        cfg.check_paths('convention')
        return load_convention(cfg.convention)
    return default_convention()


def _print_table(columns, rows):
    cells = [[str(c) for c in columns]] + [[f"{v:.3f}" if isinstance(v, float) else str(v) for v in row]
                                          for row in rows]
    widths = [max(len(row[k]) for row in cells) for k in range(len(columns))]
    for row in cells:
        print("  ".join(val.rjust(width) for val, width in zip(row, widths)))


def _print_summaries(summaries):
    _print_table(('label', 'frames', 'mean_abs_mm', 'median_abs_mm', 'mean_rel_mm', 'median_rel_mm'),
                 [(s.label, s.frame_count, s.mean_mpjpe_abs, s.median_mpjpe_abs, s.mean_mpjpe_rel,
                   s.median_mpjpe_rel) for s in summaries])


def cmd_synth(cfg):
    if cfg.occluded_views > cfg.camera_count:
        raise UsageError(f"--occluded-views {cfg.occluded_views} exceeds the {cfg.camera_count} cameras of the rig")
    conv = _convention(cfg)
    rig_spec = cfg.rig_spec()
    frames, manifest = generate_sequence(rig_spec, cfg.motion_spec(), cfg.corruption_spec(), cfg.frames, conv=conv,
                                         desynced=cfg.desync_cameras)
    out = Path(cfg.output)
    save_sequence(frames, out / 'sequence.jsonl', cfg.seed)
    save_manifest(manifest, out / 'manifest.json')
    save_cameras(make_rig(rig_spec), out / 'cameras.json')
    save_convention(conv, out / 'convention.json', cfg.seed)
    print(f"Wrote {len(frames)} frames, {rig_spec.camera_count} cameras (seed {cfg.seed}) to {out}")


def _load_inputs(cfg):
    cfg.check_paths('cameras', 'sequence')
    conv = _convention(cfg)
    cameras = load_cameras(cfg.cameras)
    frames = load_sequence(cfg.sequence, conv)
    if cfg.drop_cameras:
        frames = drop_views(frames, cfg.drop_cameras)
        cameras = [cam for cam in cameras if cam.id not in set(cfg.drop_cameras)]
    rig = index_rig(cameras)
    missing = sorted({cid for frame in frames for cid in frame.camera_ids} - set(rig))
    if missing:
        raise ValidationError(f"Sequence references cameras {missing} absent from {cfg.cameras}")
    return conv, cameras, frames


def cmd_run(cfg):
    conv, cameras, frames = _load_inputs(cfg)
    config = PipelineConfig.from_run_config(cfg)
    results = run_sequence(frames, cameras, conv, config, cfg.jobs)
    kept, summaries = summarize(results, config.metrics)
    out = Path(cfg.output)
    write_metrics(kept, summaries, out / 'metrics.csv', cfg.seed)
    save_poses(((res.frame_id, res.label, res.pose) for res in results), out / 'poses.jsonl', cfg.seed)
    _print_summaries(summaries)


def cmd_evaluate(cfg):
    cfg.check_paths('sequence', 'poses')
    conv = _convention(cfg)
    frames = load_sequence(cfg.sequence, conv)
    poses = load_poses(cfg.poses, conv)
    options = cfg.metric_options()
    metrics = []
    for frame in frames:
        if frame.clamped and not options.include_clamped:
            continue
        if frame.frame_id not in poses:
            raise ValidationError(f"{cfg.poses} has no pose for frame {frame.frame_id}")
        metrics.append(frame_metrics(frame.frame_id, poses[frame.frame_id], frame.gt, conv, frame.label, options))
    summaries = aggregate(metrics)
    write_metrics(metrics, summaries, Path(cfg.output) / 'metrics.csv', cfg.seed)
    _print_summaries(summaries)


def _cmd_ablate(cfg, ablation, filename):
    conv, cameras, frames = _load_inputs(cfg)
    config = PipelineConfig.from_run_config(cfg)
    rows = ablation(frames, cameras, conv, config, np.random.default_rng(cfg.seed), cfg.baseline, cfg.jobs)
    table = [(row.method, row.count, row.mpjpe_abs, row.mpjpe_rel, row.frames) for row in rows]
    write_table(ABLATION_COLUMNS, table, Path(cfg.output) / filename, cfg.seed)
    _print_table(ABLATION_COLUMNS, table)


def cmd_ablate_desync(cfg):
    _cmd_ablate(cfg, ablate_desync, 'ablate_desync.csv')


def cmd_ablate_views(cfg):
    _cmd_ablate(cfg, ablate_views, 'ablate_views.csv')


def cmd_compare(cfg, inputs, names):
    if len(inputs) < 2:
        raise UsageError(f"compare needs at least 2 summary files, got {len(inputs)}")
    names = [name.strip() for name in names.split(',')] if names else list(inputs)
    if len(names) != len(inputs):
        raise UsageError(f"--names gives {len(names)} names for {len(inputs)} inputs")
    column = 'mean_mpjpe_abs' if cfg.metric == 'abs' else 'mean_mpjpe_rel'
    tables = [{s.label: getattr(s, column) for s in read_summary(path)} for path in inputs]
    labels = sorted(tables[0])
    diffs = []
    for name, table in zip(names[1:], tables[1:]):
        if set(table) != set(labels):
            diffs.append(f"{name}: missing {sorted(set(labels) - set(table))},"
                         f" extra {sorted(set(table) - set(labels))}")
    if diffs:
        raise ValidationError(f"Mismatched labels against {names[0]}: " + "; ".join(diffs))
    columns = ['method'] + labels + ['Avg']
    rows = [[name] + [table[label] for label in labels] + [float(np.mean([table[label] for label in labels]))]
            for name, table in zip(names, tables)]
    write_table(columns, rows, Path(cfg.output) / 'compare.csv', cfg.seed)
    _print_table(columns, rows)


COMMANDS = {
    'synth': cmd_synth,
    'run': cmd_run,
    'evaluate': cmd_evaluate,
    'ablate-desync': cmd_ablate_desync,
    'ablate-views': cmd_ablate_views,
}


def main(argv=None):
    """Module core function: returns the exit status."""
    init_log("mvfuse")
    parser = build_parser()
    args = parser.parse_args(argv)
    set_verbosity(args.verbose)
    try:
        cfg = resolve_config(args)
        if args.command == 'compare':
            cmd_compare(cfg, args.inputs, args.names)
        else:
            COMMANDS[args.command](cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"mvfuse {args.command}: error: {exc}", file=sys.stderr)
        return 2
    #pylint: disable=broad-exception-caught
    except Exception as exc:
        excstr = str(''.join(traceback.format_exception(type(exc), exc, exc.__traceback__)))
        get_log().debug(f"mvfuse {args.command} traceback: {excstr}")
        get_log().error(f"mvfuse {args.command} failed: {exc}")
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
