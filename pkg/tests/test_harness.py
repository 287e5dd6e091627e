import json

import pandas as pd
import pytest

from oemde.__main__ import main
from oemde.core import ConvergenceTrace
from oemde.harness import (
    ExperimentConfig,
    emit_convergence_csv,
    run_experiment,
)
from oemde.harness.control import EXIT_CONFIG, EXIT_FAULT, EXIT_OK
from oemde.harness.curves import convergence_frames
from oemde.harness.loaders import load_cell_traces, load_errors, load_traces
from oemde.harness.runner import run_trial, trace_csv, trace_path
from oemde.stats import summarize, wilcoxon_rank_sum
from oemde.utils import CellNotFound, ConfigurationError


def tiny_config(tmp_path, **kwargs):
    values = dict(
        variants=['OEMDE'],
        functions=['sphere'],
        dimensions=[5],
        trials=2,
        nfc_per_dim=40,
        output_dir=str(tmp_path),
    )
    values.update(kwargs)
    return ExperimentConfig(**values)


def test_file_count_contract(tmp_path):
    out = run_experiment(tiny_config(tmp_path))
    traces = sorted((out / 'traces' / 'OEMDE' / 'sphere_D5').iterdir())
    assert [p.name for p in traces] == ['trial_000.csv', 'trial_001.csv']
    summary = pd.read_csv(out / 'summary.csv')
    assert len(summary) == 1
    assert summary.loc[0, 'n_runs'] == 2
    assert json.loads((out / 'config.json').read_text())['trials'] == 2
    assert (out / 'curves' / 'sphere_D5.csv').is_file()
    assert (out / 'curves' / 'sphere_D5_median.csv').is_file()


def test_rerun_is_byte_identical(tmp_path):
    config = dict(variants=['OEMDE', 'MDE'], trials=3)
    a = run_experiment(tiny_config(tmp_path / 'a', **config))
    b = run_experiment(tiny_config(tmp_path / 'b', **config))
    files = [
        p.relative_to(a)
        for p in sorted(a.rglob('*'))
        if p.is_file() and p.name != 'config.json'
    ]
    assert files
    for rel in files:
        assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel


def test_cell_independence(tmp_path):
    config = tiny_config(tmp_path, trials=3)
    out = run_experiment(config)
    path = trace_path(out, 'OEMDE', 'sphere', 5, 1)
    before = path.read_bytes()
    path.unlink()
    run_trial(config, 'OEMDE', 'sphere', 5, 1)
    assert path.read_bytes() == before


def test_verdict_matrix_shape(tmp_path):
    config = tiny_config(
        tmp_path,
        variants=['OEMDE', 'MDE'],
        functions=['sphere', 'rastrigin'],
        dimensions=[2, 3],
        trials=4,
    )
    out = run_experiment(config)
    verdicts = pd.read_csv(out / 'verdicts.csv')
    assert len(verdicts) == 4
    assert set(verdicts['competitor']) == {'MDE'}
    assert set(verdicts['sign']) <= {'+', '=', '-'}
    errors = load_errors(out)
    for row in verdicts.itertuples():
        expected = wilcoxon_rank_sum(
            errors['OEMDE', row.function, row.dimension],
            errors['MDE', row.function, row.dimension],
            config.alpha,
        )
        assert row.sign == expected.sign.value
        assert row.p_value == pytest.approx(expected.p_value)
    tally = pd.read_csv(out / 'tally.csv')
    assert list(tally['dimension']) == [2, 3]
    assert list(tally[['plus', 'equal', 'minus']].sum(axis=1)) == [2, 2]


def test_summary_matches_runs(tmp_path):
    out = run_experiment(tiny_config(tmp_path, trials=3))
    cell = json.loads((out / 'cells' / 'OEMDE' / 'sphere_D5.json').read_text())
    expected = summarize([r['final_error'] for r in cell['runs']], 1e-8)
    summary = json.loads((out / 'summary.json').read_text())['cells'][0]
    assert summary['mean_error'] == expected.mean_error
    assert summary['std_error'] == expected.std_error
    assert summary['cell'] == expected.format()
    assert [r['trial'] for r in cell['runs']] == [0, 1, 2]


def test_loaders_round_trip(tmp_path):
    config = tiny_config(tmp_path, variants=['OEMDE', 'MDE'])
    out = run_experiment(config)
    traces = load_cell_traces(out, 'sphere', 5)
    assert sorted(traces) == ['MDE', 'OEMDE']
    assert all(len(ts) == 2 for ts in traces.values())
    trace = traces['MDE'][0]
    on_disk = trace_path(out, 'MDE', 'sphere', 5, 0).read_text()
    assert trace_csv(trace) == on_disk
    with pytest.raises(CellNotFound):
        load_traces(out, 'MDE', 'sphere', 7)
    with pytest.raises(LookupError):
        load_cell_traces(out, 'ackley', 5)


def test_config_validation(tmp_path):
    with pytest.raises(ConfigurationError):
        tiny_config(tmp_path, variants=['JADE'])
    with pytest.raises(ConfigurationError):
        tiny_config(tmp_path, functions=['nope'])
    with pytest.raises(ConfigurationError):
        tiny_config(tmp_path, trials=0)
    with pytest.raises(ConfigurationError):
        tiny_config(tmp_path, reference='JADE')
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_dict({'colour': 'red'})
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_file(tmp_path / 'missing.json')


def test_config_from_file(tmp_path):
    path = tmp_path / 'experiment.json'
    path.write_text(json.dumps({'variants': ['MDE'], 'dimensions': [2]}))
    config = ExperimentConfig.from_file(path)
    assert config.variants == ['MDE']
    assert config.trials == 30
    assert ExperimentConfig.from_dict(config.to_dict()) == config


def test_trial_seeds_are_distinct(tmp_path):
    config = tiny_config(tmp_path, variants=['OEMDE', 'MDE'], trials=5)
    seeds = {
        config.seed(v, f, d, t)
        for v, f, d in config.cells()
        for t in range(config.trials)
    }
    assert len(seeds) == 10


def test_step_semantics_on_grid():
    traces = {'A': [ConvergenceTrace([(6, 10.0), (12, 4.0)])]}
    long_frame, median_frame = convergence_frames(traces, points=7)
    assert list(long_frame['nfc']) == [6, 12]
    medians = dict(
        zip(median_frame['nfc_grid_point'], median_frame['median_error'])
    )
    assert medians[9] == 10.0
    assert medians[6] == 10.0
    assert medians[12] == 4.0


def test_median_of_three():
    traces = {
        'A': [
            ConvergenceTrace([(6, e), (12, e / 10)])
            for e in (1.0, 3.0, 2.0)
        ]
    }
    _, median_frame = convergence_frames(traces, points=2)
    assert list(median_frame['median_error']) == [2.0, 0.2]


def test_emit_convergence_csv(tmp_path):
    traces = {'OEMDE': [ConvergenceTrace([(12, 1.0), (24, 0.5)])]}
    long_path, median_path = emit_convergence_csv(
        traces, 'sphere', 5, tmp_path, points=3
    )
    assert long_path.name == 'sphere_D5.csv'
    assert median_path.name == 'sphere_D5_median.csv'
    assert list(pd.read_csv(long_path).columns) == [
        'variant',
        'trial',
        'nfc',
        'best_error',
    ]
    assert list(pd.read_csv(median_path)['nfc_grid_point']) == [12, 18, 24]
    with pytest.raises(CellNotFound):
        emit_convergence_csv({}, 'sphere', 5, tmp_path)


def test_cli_list(capsys):
    assert main(['list-functions']) == EXIT_OK
    assert 'sphere' in capsys.readouterr().out
    assert main(['list-variants']) == EXIT_OK
    assert 'OEMDE' in capsys.readouterr().out


def test_cli_solve(capsys):
    argv = ['solve', '--variant', 'OEMDE', '--function', 'sphere']
    argv += ['--dim', '3', '--seed', '4', '--nfc-max', '120']
    assert main(argv) == EXIT_OK
    first = capsys.readouterr().out
    assert main(argv) == EXIT_OK
    assert capsys.readouterr().out == first
    document, end = json.JSONDecoder().raw_decode(first)
    assert document['result']['nfc_used'] <= 120 + 12
    assert first[end:].strip().splitlines()[0] == 'nfc,best_error'


def test_cli_solve_trace_file(tmp_path, capsys):
    trace = tmp_path / 'trace.csv'
    argv = ['solve', '--variant', 'MDE', '--function', 'ackley', '--dim', '2']
    argv += ['--nfc-max', '60', '--trace', str(trace)]
    assert main(argv) == EXIT_OK
    out = capsys.readouterr().out
    assert 'nfc,best_error' not in out
    assert trace.read_text().startswith('nfc,best_error')


@pytest.mark.parametrize(
    'argv',
    [
        ['solve', '--variant', 'JADE', '--function', 'sphere', '--dim', '3'],
        ['solve', '--variant', 'MDE', '--function', 'nope', '--dim', '3'],
        ['solve', '--variant', 'OEMDE', '--function', 'sphere', '--dim', '3',
         '--np', '4'],
        ['run', '--config', 'does-not-exist.json'],
        ['frobnicate'],
        [],
    ],
)
def test_cli_configuration_errors(argv, capsys):
    assert main(argv) == EXIT_CONFIG


def test_cli_missing_results(tmp_path, capsys):
    assert main(['compare', '--dir', str(tmp_path)]) == EXIT_FAULT
    assert 'no result cells' in capsys.readouterr().err
    argv = ['curves', '--dir', str(tmp_path), '--function', 'sphere']
    assert main(argv + ['--dim', '5']) == EXIT_FAULT


def test_cli_run_compare_curves(tmp_path, capsys):
    config = tmp_path / 'experiment.json'
    results = tmp_path / 'results'
    config.write_text(
        json.dumps(
            {
                'variants': ['OEMDE', 'MDE'],
                'functions': ['sphere'],
                'dimensions': [2],
                'trials': 3,
                'nfc_per_dim': 50,
                'output_dir': str(results),
            }
        )
    )
    assert main(['run', '--config', str(config)]) == EXIT_OK
    assert 'results written to' in capsys.readouterr().out

    assert main(['compare', '--dir', str(results)]) == EXIT_OK
    out = capsys.readouterr().out
    assert 'reference: OEMDE' in out
    assert 'plus' in out

    out_dir = tmp_path / 'plots'
    argv = ['curves', '--dir', str(results), '--function', 'sphere']
    argv += ['--dim', '2', '--out', str(out_dir)]
    assert main(argv) == EXIT_OK
    assert (out_dir / 'sphere_D2_median.csv').is_file()


def test_rerun_replaces_earlier_results(tmp_path, capsys):
    run_experiment(
        tiny_config(
            tmp_path, variants=['OEMDE', 'MDE', 'EMDE'], dimensions=[3],
            trials=4,
        )
    )
    run_experiment(
        tiny_config(tmp_path, variants=['OEMDE', 'MDE'], dimensions=[3])
    )
    traces = load_cell_traces(tmp_path, 'sphere', 3)
    assert {v: len(ts) for v, ts in traces.items()} == {'MDE': 2, 'OEMDE': 2}
    assert set(load_errors(tmp_path)) == {
        ('MDE', 'sphere', 3),
        ('OEMDE', 'sphere', 3),
    }

    argv = ['curves', '--dir', str(tmp_path), '--function', 'sphere']
    assert main(argv + ['--dim', '3']) == EXIT_OK
    curves = pd.read_csv(tmp_path / 'curves' / 'sphere_D3.csv')
    assert curves.groupby('variant')['trial'].nunique().to_dict() == {
        'MDE': 2,
        'OEMDE': 2,
    }


@pytest.mark.parametrize(
    'data',
    [
        {'trials': 2.5},
        {'trials': '3'},
        {'workers': True},
        {'base_seed': 1.0},
        {'grid_points': None},
        {'alpha': '0.05'},
        {'dimensions': ['ten']},
        {'dimensions': [2.5]},
        {'dimensions': 10},
        {'variants': 'OEMDE'},
        {'functions': [1]},
    ],
)
def test_config_type_errors(data):
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_dict(data)


@pytest.mark.parametrize(
    'data', [{'trials': 2.5}, {'dimensions': ['ten']}, {'workers': 0}]
)
def test_cli_rejects_bad_config_before_running(tmp_path, capsys, data):
    results = tmp_path / 'results'
    config = tmp_path / 'experiment.json'
    config.write_text(json.dumps(dict(data, output_dir=str(results))))
    assert main(['run', '--config', str(config)]) == EXIT_CONFIG
    assert 'configuration error' in capsys.readouterr().err
    assert not results.exists()


def test_cli_unexpected_failure_is_a_fault(tmp_path, capsys, monkeypatch):
    def broken(config):
        raise RuntimeError('worker pool died')

    monkeypatch.setattr('oemde.harness.control.run_experiment', broken)
    config = tmp_path / 'experiment.json'
    config.write_text(json.dumps({'output_dir': str(tmp_path / 'out')}))
    assert main(['run', '--config', str(config)]) == EXIT_FAULT
    assert 'RuntimeError: worker pool died' in capsys.readouterr().err


def test_curves_reject_variant_without_traces(tmp_path):
    traces = {
        'OEMDE': [ConvergenceTrace([(12, 1.0), (24, 0.5)])],
        'MDE': [],
    }
    with pytest.raises(CellNotFound, match='MDE'):
        emit_convergence_csv(traces, 'sphere', 5, tmp_path)
    assert not list(tmp_path.iterdir())
