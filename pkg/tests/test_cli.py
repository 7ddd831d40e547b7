#!/usr/bin/env python3
"""
Tests for the analyze_sop command-line interface.
"""

import csv
import dataclasses
import io
import json

import pytest

import analyze_sop
from analyze_sop import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, PARAM_FLAGS, parse_arguments, run
from secrecy_outage.params import FIELD_DOCS, SystemParams

HD_POINT = ['--duplex', 'hd', '--ed', 'colluding', '--k', '3', '--alpha', '4',
            '--d-bu', '10', '--radius', '100', '--rho-e', '0.001']


@pytest.mark.unit
def test_every_field_has_a_flag_with_units(capsys):
    fields = {f.name for f in dataclasses.fields(SystemParams)}
    assert set(PARAM_FLAGS) == fields
    with pytest.raises(SystemExit):
        parse_arguments(['analytic', '--help'])
    help_text = capsys.readouterr().out
    for name, flag in PARAM_FLAGS.items():
        assert flag in help_text
        assert f"[{FIELD_DOCS[name][0]}]" in help_text


@pytest.mark.unit
def test_flags_override_config(tmp_path):
    config = tmp_path / 'params.json'
    config.write_text(json.dumps({'k_antennas': 4, 'rho_e': 0.004, 'duplex': 'fd'}))
    args = parse_arguments(['analytic', '--config', str(config), '--rho-e', '0.002',
                            '--no-ed-noise'])
    params = analyze_sop.build_params(args)
    assert params.k_antennas == 4
    assert params.rho_e == 0.002
    assert params.ed_noise is False
    assert params.duplex.value == 'fd'


@pytest.mark.unit
def test_analytic_text_and_csv(capsys):
    assert run(['analytic'] + HD_POINT) == EXIT_OK
    assert 'HD-colluding: SOP =' in capsys.readouterr().out

    assert run(['analytic', '--format', 'csv'] + HD_POINT) == EXIT_OK
    fields = capsys.readouterr().out.strip().split(',')
    assert fields[:2] == ['hd', 'colluding']
    assert 0.0 < float(fields[2]) < 1.0
    assert fields[4] == 'Exact'


@pytest.mark.unit
def test_analytic_json(capsys):
    assert run(['analytic', '--format', 'json', '--duplex', 'fd', '--ed', 'independent']) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data['result']['kind'] == 'UpperBound'
    assert data['params']['duplex'] == 'fd'


@pytest.mark.unit
def test_simulate_output_is_deterministic(capsys):
    argv = ['simulate', '--trials', '20000', '--seed', '42', '--duplex', 'fd', '--ed', 'colluding']
    assert run(argv) == EXIT_OK
    first = capsys.readouterr().out
    assert run(argv + ['--threads', '3']) == EXIT_OK
    second = capsys.readouterr().out
    assert first == second
    assert 'Wilson' in first


@pytest.mark.unit
def test_parameter_errors_exit_with_usage_code(capsys):
    assert run(['analytic', '--d-bu', '80', '--radius', '50']) == EXIT_USAGE
    err = capsys.readouterr().err
    assert '--d-bu' in err
    assert 'Fix:' in err

    assert run(['analytic', '--k', '0', '--beta', '0.5']) == EXIT_USAGE
    err = capsys.readouterr().err
    assert '--k' in err and '--beta' in err


@pytest.mark.unit
def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        run(['simulate', '--trials', 'many'])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        run([])
    assert exc.value.code == 2


@pytest.mark.unit
def test_approximation_outside_its_domain(capsys):
    argv = ['analytic', '--family', 'approximation', '--duplex', 'fd', '--ed', 'colluding',
            '--d-bu', '5', '--varrho', '6']
    assert run(argv) == EXIT_USAGE
    assert 'Error' in capsys.readouterr().err


@pytest.mark.unit
def test_sweep_inline_to_stdout(capsys):
    argv = ['sweep', '--axis', 'rho_e', '--values', '0.003', '0.001', '0.002',
            '--scenarios', 'hd-independent', 'fd-colluding', '--d-bu', '5']
    assert run(argv) == EXIT_OK
    captured = capsys.readouterr()
    rows = list(csv.DictReader(io.StringIO(captured.out)))
    assert len(rows) == 6
    assert [float(r['axis_value']) for r in rows[::2]] == [0.001, 0.002, 0.003]
    assert 'Sweep over rho_e' in captured.err


@pytest.mark.unit
def test_sweep_usage_errors(capsys):
    assert run(['sweep']) == EXIT_USAGE
    assert run(['sweep', '--axis', 'rho_e']) == EXIT_USAGE
    assert run(['sweep', '--axis', 'rho_e', '--values', '0.001', '--methods', 'Guess']) == EXIT_USAGE
    assert run(['sweep', '--recipe', 'fig99']) == EXIT_USAGE
    assert run(['sweep', '--recipe', 'table2_pb', '--crossover']) == EXIT_USAGE


@pytest.mark.integration
def test_sweep_recipe_writes_csv_and_plot(tmp_path, capsys):
    out = tmp_path / 'table2_k.csv'
    plot = tmp_path / 'plot.py'
    assert run(['sweep', '--recipe', 'table2_k', '--out', str(out), '--plot', str(plot)]) == EXIT_OK
    text = capsys.readouterr().out
    assert 'PASS Decreasing' in text
    with open(out, encoding='utf-8') as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 6 * 4
    assert plot.exists()


@pytest.mark.unit
def test_recipe_sweep_applies_parameter_flags(capsys):
    argv = ['sweep', '--recipe', 'table2_k', '--scenarios', 'hd-colluding']
    assert run(argv) == EXIT_OK
    plain = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert run(argv + ['--rho-e', '0.004']) == EXIT_OK
    captured = capsys.readouterr()
    denser = list(csv.DictReader(io.StringIO(captured.out)))
    assert len(plain) == len(denser) == 6
    assert all(float(d['value']) > float(p['value']) for p, d in zip(plain, denser))
    assert 'Overridden from the command line' in captured.err
    assert 'PASS Decreasing' in captured.err


@pytest.mark.unit
def test_recipe_sweep_rejects_flags_the_recipe_fixes(capsys):
    assert run(['sweep', '--recipe', 'table2_k', '--k', '3']) == EXIT_USAGE
    assert 'k_antennas' in capsys.readouterr().err
    assert run(['sweep', '--recipe', 'table2_k', '--duplex', 'fd']) == EXIT_USAGE
    assert run(['sweep', '--recipe', 'table2_k', '--config', 'params.json']) == EXIT_USAGE


@pytest.mark.unit
def test_compare_single_point(capsys):
    argv = ['compare', '--duplex', 'hd', '--ed', 'colluding', '--alpha', '4', '--d-bu', '10',
            '--radius', '100', '--rho-e', '0.001', '--trials', '30000', '--seed', '5']
    assert run(argv) == EXIT_OK
    assert 'PASS' in capsys.readouterr().out


@pytest.mark.unit
def test_compare_rejects_missing_family(capsys):
    argv = ['compare', '--duplex', 'hd', '--ed', 'colluding', '--family', 'bound']
    assert run(argv) == EXIT_USAGE
    assert '--family' in capsys.readouterr().err


@pytest.mark.unit
def test_validate_special_functions(capsys):
    assert run(['validate', '--suite', 'special-functions']) == EXIT_OK
    out = capsys.readouterr().out
    assert '[PASS] special-functions' in out
    assert '1/1 suites passed' in out


@pytest.mark.unit
def test_recipes_listing(capsys):
    assert run(['recipes']) == EXIT_OK
    out = capsys.readouterr().out
    for name in ('fig2', 'fig5a', 'table2_alpha'):
        assert name in out
    assert run(['recipes', '--show', 'fig3']) == EXIT_OK
    assert 'rho_e' in capsys.readouterr().out
    assert run(['recipes', '--show', 'nope']) == EXIT_USAGE
