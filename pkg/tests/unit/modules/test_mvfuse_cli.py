# --- BEGIN COPYRIGHT BLOCK ---
# Copyright (C) 2026 The mvfuse authors.
# All rights reserved.
#
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)
# --- END COPYRIGHT BLOCK ---
#

""" This module contains the testcases for the mvfuse command line."""

# Disable pylint warning triggered by standard fixture usage
# pylint: disable=redefined-outer-name
# pylint: disable=unused-argument

import csv
import json
import pytest


def _read(path):
    return path.read_bytes()


def _csv_rows(path):
    with open(path, 'rt', encoding='utf-8') as file:
        return list(csv.DictReader(line for line in file if not line.startswith('#')))


@pytest.fixture
def dataset(tmp_path, mvfusetest):
    """A 12 frames synthetic dataset."""
    out = tmp_path / 'data'
    mvfusetest.run_ok('synth', '--cameras', 4, '--frames', 12, '--occluded-views', 3, '--seed', 7, '--output', out)
    return out


def _run_args(dataset, output, *extra):
    return ('run', '--cameras', dataset / 'cameras.json', '--sequence', dataset / 'sequence.jsonl',
            '--output', output, *extra)


def test_synth(tmp_path, mvfusetest, dataset):
    """Test mvfuse synth.
        Setup: synth with seed 7
        Step 1: check the output directory
        Result 1: sequence, manifest, cameras and convention files are written
        Step 2: synth again with the same seed
        Result 2: every file is byte identical
    """
    log = mvfusetest.get_log(__name__)
    names = ('sequence.jsonl', 'manifest.json', 'cameras.json', 'convention.json')
    for name in names:
        assert (dataset / name).is_file()
    again = tmp_path / 'again'
    mvfusetest.run_ok('synth', '--cameras', 4, '--frames', 12, '--occluded-views', 3, '--seed', 7, '--output', again)
    for name in names:
        log.info(f'comparing {name}')
        assert _read(dataset / name) == _read(again / name)
    other = tmp_path / 'other'
    mvfusetest.run_ok('synth', '--cameras', 4, '--frames', 12, '--occluded-views', 3, '--seed', 8, '--output', other)
    assert _read(dataset / 'sequence.jsonl') != _read(other / 'sequence.jsonl')


def test_synth_desync(tmp_path, mvfusetest, dataset):
    """Test mvfuse synth with desynchronized cameras.
        Step 1: synth with --desync-cameras cam1,cam3
        Result 1: the manifest lists both cameras and the clamped frames (first and last 2 frames at most)
        Result 2: the convention file records its format version and seed
    """
    out = tmp_path / 'desync'
    mvfusetest.run_ok('synth', '--cameras', 4, '--frames', 12, '--occluded-views', 3, '--seed', 7,
                      '--desync-cameras', 'cam1,cam3', '--output', out)
    manifest = json.loads((out / 'manifest.json').read_text(encoding='utf-8'))
    assert manifest['desynced_cameras'] == ['cam1', 'cam3']
    assert set(manifest['clamped_frames']) <= {0, 1, 10, 11}
    plain = json.loads((dataset / 'manifest.json').read_text(encoding='utf-8'))
    assert plain['desynced_cameras'] == [] and plain['clamped_frames'] == []
    convention = json.loads((dataset / 'convention.json').read_text(encoding='utf-8'))
    assert convention['seed'] == 7
    assert 'format_version' in convention


def test_synth_usage_errors(tmp_path, mvfusetest):
    """Test that impossible synth requests are usage errors (exit status 2)."""
    result = mvfusetest.run_cli('synth', '--cameras', 4, '--occluded-views', 5, '--output', tmp_path / 'x')
    assert result.returncode == 2
    assert 'occluded-views' in result.stderr
    assert not (tmp_path / 'x').exists()
    assert mvfusetest.run_cli('synth', '--no-such-flag').returncode == 2
    assert mvfusetest.run_cli('synth', '--frames', 'ten').returncode == 2
    assert mvfusetest.run_cli().returncode == 2


def test_run(tmp_path, mvfusetest, dataset):
    """Test mvfuse run.
        Step 1: run twice on the same data, once with 2 worker processes
        Result 1: metrics, summary and poses files are byte identical
        Result 2: the summary table is printed on stdout
        Step 3: naive control (uniform weights, no refinement)
        Result 3: a different, larger mean MPJPE
    """
    first = tmp_path / 'first'
    result = mvfusetest.run_ok(*_run_args(dataset, first))
    assert 'synthetic' in result.stdout
    for name in ('metrics.csv', 'metrics_summary.csv', 'poses.jsonl'):
        assert (first / name).is_file()
    assert _read(first / 'metrics.csv').startswith(b'# format_version=1.0 seed=0\n')
    second = tmp_path / 'second'
    mvfusetest.run_ok(*_run_args(dataset, second, '--jobs', 2))
    for name in ('metrics.csv', 'metrics_summary.csv', 'poses.jsonl'):
        assert _read(first / name) == _read(second / name)
    naive = tmp_path / 'naive'
    mvfusetest.run_ok(*_run_args(dataset, naive, '--weights-strategy', 'uniform', '--no-optimize'))
    full = float(_csv_rows(first / 'metrics_summary.csv')[0]['mean_mpjpe_abs_mm'])
    plain = float(_csv_rows(naive / 'metrics_summary.csv')[0]['mean_mpjpe_abs_mm'])
    assert full < plain
    assert len(_csv_rows(first / 'metrics.csv')) == 12


def test_run_errors(tmp_path, mvfusetest, dataset):
    """Test run failures.
        Step 1: missing camera file
        Result 1: exit status 1 and a one line diagnostic
        Step 2: unknown strategy, unknown dropped camera
        Result 2: exit status 2 (usage) then 1 (runtime)
    """
    result = mvfusetest.run_cli('run', '--cameras', tmp_path / 'none.json', '--sequence', dataset / 'sequence.jsonl',
                                '--output', tmp_path / 'out')
    assert result.returncode == 1
    assert 'mvfuse run failed' in result.stderr
    assert 'none.json' in result.stderr
    assert mvfusetest.run_cli(*_run_args(dataset, tmp_path / 'out', '--weights-strategy', 'median')).returncode == 2
    result = mvfusetest.run_cli(*_run_args(dataset, tmp_path / 'out', '--drop-cameras', 'cam9'))
    assert result.returncode == 1
    assert 'cam9' in result.stderr


def test_drop_cameras(tmp_path, mvfusetest, dataset):
    mvfusetest.run_ok(*_run_args(dataset, tmp_path / 'out', '--drop-cameras', 'cam0,cam1'))
    assert len(_csv_rows(tmp_path / 'out' / 'metrics.csv')) == 12


def test_config_precedence(tmp_path, mvfusetest, dataset):
    """Test defaults < config file < command line.
        Setup: config file selecting uniform weights without refinement
        Step 1: run with --config, and with MVFUSE_CONFIG
        Result 1: same metrics as the equivalent flags
        Step 2: run with --config and --weights-strategy per_joint_reprojection
        Result 2: the flag wins
        Step 3: config with an unknown key
        Result 3: exit status 1
    """
    config = tmp_path / 'config.yml'
    config.write_text("weights_strategy: uniform\noptimize: false\n", encoding='utf-8')
    mvfusetest.run_ok(*_run_args(dataset, tmp_path / 'flags', '--weights-strategy', 'uniform', '--no-optimize'))
    mvfusetest.run_ok(*_run_args(dataset, tmp_path / 'config', '--config', config))
    mvfusetest.run_ok(*_run_args(dataset, tmp_path / 'env'), env={'MVFUSE_CONFIG': str(config)})
    expected = _read(tmp_path / 'flags' / 'metrics.csv')
    assert _read(tmp_path / 'config' / 'metrics.csv') == expected
    assert _read(tmp_path / 'env' / 'metrics.csv') == expected
    mvfusetest.run_ok(*_run_args(dataset, tmp_path / 'mixed', '--config', config,
                                 '--weights-strategy', 'per_joint_reprojection'))
    mvfusetest.run_ok(*_run_args(dataset, tmp_path / 'reference', '--no-optimize'))
    assert _read(tmp_path / 'mixed' / 'metrics.csv') == _read(tmp_path / 'reference' / 'metrics.csv')
    bad = tmp_path / 'bad.yml'
    bad.write_text("weight_strategy: uniform\n", encoding='utf-8')
    result = mvfusetest.run_cli(*_run_args(dataset, tmp_path / 'bad', '--config', bad))
    assert result.returncode == 1
    assert 'Unexpected parameters' in result.stderr


def test_evaluate(tmp_path, mvfusetest, dataset):
    """Test mvfuse evaluate.
        Result 1: evaluating the poses written by run reproduces its metrics
        Result 2: evaluating again gives the same bytes
    """
    mvfusetest.run_ok(*_run_args(dataset, tmp_path / 'run'))
    mvfusetest.run_ok('evaluate', '--sequence', dataset / 'sequence.jsonl', '--poses', tmp_path / 'run' / 'poses.jsonl',
                      '--output', tmp_path / 'eval')
    assert _read(tmp_path / 'eval' / 'metrics.csv') == _read(tmp_path / 'run' / 'metrics.csv')
    assert _read(tmp_path / 'eval' / 'metrics_summary.csv') == _read(tmp_path / 'run' / 'metrics_summary.csv')
    mvfusetest.run_ok('evaluate', '--sequence', dataset / 'sequence.jsonl', '--poses', tmp_path / 'run' / 'poses.jsonl',
                      '--output', tmp_path / 'again')
    for name in ('metrics.csv', 'metrics_summary.csv'):
        assert _read(tmp_path / 'again' / name) == _read(tmp_path / 'eval' / name)


def test_ablations(tmp_path, mvfusetest, dataset):
    """Test ablate-desync and ablate-views.
        Result 1: one row per count and method, plot ready columns
        Result 2: same seed, same bytes for both ablations
    """
    out = tmp_path / 'abl'
    mvfusetest.run_ok('ablate-desync', '--cameras', dataset / 'cameras.json', '--sequence', dataset / 'sequence.jsonl',
                      '--no-optimize', '--baseline', '--output', out)
    rows = _csv_rows(out / 'ablate_desync.csv')
    assert list(rows[0]) == ['method', 'count', 'mpjpe_abs_mm', 'mpjpe_rel_mm', 'frames']
    assert [(row['method'], row['count']) for row in rows] == \
        [(m, str(c)) for c in range(4) for m in ('fusion', 'baseline')]
    mvfusetest.run_ok('ablate-desync', '--cameras', dataset / 'cameras.json', '--sequence', dataset / 'sequence.jsonl',
                      '--no-optimize', '--baseline', '--output', tmp_path / 'abl2')
    assert _read(out / 'ablate_desync.csv') == _read(tmp_path / 'abl2' / 'ablate_desync.csv')
    mvfusetest.run_ok('ablate-views', '--cameras', dataset / 'cameras.json', '--sequence', dataset / 'sequence.jsonl',
                      '--no-optimize', '--output', out, '--seed', 3)
    rows = _csv_rows(out / 'ablate_views.csv')
    assert [row['count'] for row in rows] == ['4', '3', '2']
    again = tmp_path / 'again'
    mvfusetest.run_ok('ablate-views', '--cameras', dataset / 'cameras.json', '--sequence', dataset / 'sequence.jsonl',
                      '--no-optimize', '--output', again, '--seed', 3)
    assert _read(out / 'ablate_views.csv') == _read(again / 'ablate_views.csv')


def test_compare(tmp_path, mvfusetest, dataset):
    """Test mvfuse compare.
        Setup: full pipeline and naive control runs
        Step 1: compare both summaries
        Result 1: one row per input, one column per label plus Avg
        Result 2: comparing again gives the same bytes
        Step 2: a single input
        Result 3: usage error
    """
    mvfusetest.run_ok(*_run_args(dataset, tmp_path / 'full'))
    mvfusetest.run_ok(*_run_args(dataset, tmp_path / 'naive', '--weights-strategy', 'uniform', '--no-optimize'))
    mvfusetest.run_ok('compare', tmp_path / 'full' / 'metrics_summary.csv', tmp_path / 'naive' / 'metrics_summary.csv',
                      '--names', 'full,naive', '--output', tmp_path / 'cmp')
    rows = _csv_rows(tmp_path / 'cmp' / 'compare.csv')
    assert [row['method'] for row in rows] == ['full', 'naive']
    assert list(rows[0]) == ['method', 'synthetic', 'Avg']
    assert float(rows[0]['Avg']) == pytest.approx(float(rows[0]['synthetic']))
    assert float(rows[0]['synthetic']) < float(rows[1]['synthetic'])
    mvfusetest.run_ok('compare', tmp_path / 'full' / 'metrics_summary.csv', tmp_path / 'naive' / 'metrics_summary.csv',
                      '--names', 'full,naive', '--output', tmp_path / 'cmp_again')
    assert _read(tmp_path / 'cmp' / 'compare.csv') == _read(tmp_path / 'cmp_again' / 'compare.csv')
    result = mvfusetest.run_cli('compare', tmp_path / 'full' / 'metrics_summary.csv', '--output', tmp_path / 'cmp1')
    assert result.returncode == 2
    assert mvfusetest.run_cli('compare', '--output', tmp_path / 'cmp2').returncode == 2


def test_verbose(tmp_path, mvfusetest, dataset):
    result = mvfusetest.run_ok(*_run_args(dataset, tmp_path / 'out', '--no-optimize', '-vvv'))
    assert 'DEBUG' in result.stderr
    if not mvfusetest.debugging:
        result = mvfusetest.run_ok(*_run_args(dataset, tmp_path / 'out2', '--no-optimize'))
        assert 'DEBUG' not in result.stderr
