import dataclasses

import pytest

from nodalsim.config import (
    BASELINE,
    PROTOCOL,
    ConfigError,
    SimConfig,
    derive_stream,
    preset_config,
)
from nodalsim.experiment import (
    ExperimentError,
    run_experiment,
    sweep_duplication_budget,
)
from nodalsim.metrics import parse_csv
from nodalsim.topology import path_edges
from nodalsim.trial import run_trial, run_trial_with_diagnostics


def _small_cfg(**overrides):
    base = dict(trials=4, ticks=20, messages_per_trial=16,
                duplication_budget=10)
    base.update(overrides)
    return dataclasses.replace(preset_config("paper-like"), **base)


def test_preset_lookup_and_overrides():
    cfg = preset_config("paper-like", trials=7)
    assert cfg.trials == 7
    fig = preset_config("figure1")
    assert fig.topology == "figure1-redundant"
    with pytest.raises(ConfigError):
        preset_config("nope")


def test_config_validation_errors():
    with pytest.raises(ConfigError):
        SimConfig(topology="ring").validate()
    with pytest.raises(ConfigError):
        SimConfig(rate_sever=1.5).validate()
    with pytest.raises(ConfigError):
        SimConfig(trials=0).validate()
    with pytest.raises(ConfigError):
        SimConfig(duration_min=4, duration_max=2).validate()
    with pytest.raises(ConfigError):
        SimConfig.from_dict({"bogus_field": 1})


def test_config_dict_round_trip():
    cfg = preset_config("paper-like", seed=5, rate_tap=0.01)
    assert SimConfig.from_dict(cfg.to_dict()) == cfg


def test_derive_stream_is_stable_and_label_separated():
    a = derive_stream(1, 0, "messages")
    b = derive_stream(1, 0, "messages")
    c = derive_stream(1, 0, "attacks")
    seq_a = [a.random() for _ in range(5)]
    assert seq_a == [b.random() for _ in range(5)]
    assert seq_a != [c.random() for _ in range(5)]


def test_trial_is_deterministic():
    cfg = _small_cfg()
    first = run_trial(cfg, PROTOCOL, 3)
    second = run_trial(cfg, PROTOCOL, 3)
    assert first == second
    assert run_trial(cfg, PROTOCOL, 4) != first


def test_trial_without_attacks_is_lossless():
    cfg = _small_cfg(rate_tap=0.0, rate_corrupt=0.0, rate_sever=0.0)
    for mode in (BASELINE, PROTOCOL):
        m = run_trial(cfg, mode, 0)
        assert m.delivered_clean == cfg.messages_per_trial
        assert m.lost == m.corrupt_detected == m.corrupt_undetected == 0
        assert m.retransmissions == 0
        assert m.packet_loss_copies == 0
        assert m.availability == 1.0
        assert m.mean_connectivity == 1.0


def test_modes_share_the_attack_schedule():
    cfg = _small_cfg()
    _, b = run_trial_with_diagnostics(cfg, BASELINE, 1)
    _, p = run_trial_with_diagnostics(cfg, PROTOCOL, 1)
    assert b.schedule_digest == p.schedule_digest


def test_trial_conservation_holds_under_attack():
    cfg = _small_cfg(rate_sever=0.01, rate_corrupt=0.01)
    for trial in range(3):
        for mode in (BASELINE, PROTOCOL):
            m = run_trial(cfg, mode, trial)
            total = (m.delivered_clean + m.corrupt_detected
                     + m.corrupt_undetected + m.lost)
            assert total == m.messages_attempted


def test_protocol_with_zero_budget_degenerates_to_baseline():
    cfg = _small_cfg(duplication_budget=0, critical_fraction=0.0,
                     rate_sever=0.01, rate_corrupt=0.01)
    for trial in range(3):
        b = run_trial(cfg, BASELINE, trial)
        p = run_trial(cfg, PROTOCOL, trial)
        assert dataclasses.replace(p, mode=BASELINE) == b


def test_baseline_never_duplicates_and_protocol_does():
    cfg = _small_cfg(rate_sever=0.0, rate_corrupt=0.0, rate_tap=0.0)
    _, b = run_trial_with_diagnostics(cfg, BASELINE, 0)
    _, p = run_trial_with_diagnostics(cfg, PROTOCOL, 0)
    assert b.dual_transmissions == 0
    assert p.dual_transmissions > 0


def test_dual_routes_never_share_an_edge():
    cfg = _small_cfg(rate_sever=0.02)
    _, diag = run_trial_with_diagnostics(cfg, PROTOCOL, 2)
    assert diag.disjoint_violations == 0
    for out in diag.outcomes:
        if out.dual_copy:
            e0, e1 = (set(path_edges(pp)) for pp in out.paths_used)
            assert not e0 & e1


def test_unknown_mode_rejected():
    with pytest.raises(ValueError):
        run_trial(_small_cfg(), "HYBRID", 0)


def test_experiment_outputs_parse_and_pair_up(tmp_path):
    cfg = _small_cfg(trials=3)
    result = run_experiment(cfg, out_dir=tmp_path)
    assert (tmp_path / "baseline.csv").exists()
    assert (tmp_path / "protocol.csv").exists()
    assert (tmp_path / "report.txt").exists()
    b_rows = parse_csv((tmp_path / "baseline.csv").read_text())
    p_rows = parse_csv((tmp_path / "protocol.csv").read_text())
    assert [r.trial_index for r in b_rows] == [0, 1, 2]
    assert [r.trial_index for r in p_rows] == [0, 1, 2]
    assert all(r.mode == BASELINE for r in b_rows)
    assert all(r.mode == PROTOCOL for r in p_rows)
    # paired design: both modes face the same environment per trial
    for b, p in zip(b_rows, p_rows):
        assert b.mean_connectivity == p.mean_connectivity
    assert "retransmissions" in result.report_text


def test_experiment_is_reproducible():
    cfg = _small_cfg(trials=3)
    a = run_experiment(cfg)
    b = run_experiment(cfg)
    assert a.baseline_csv == b.baseline_csv
    assert a.protocol_csv == b.protocol_csv
    assert a.report_text == b.report_text


def test_budget_sweep_reaches_target_band():
    cfg = _small_cfg(trials=8, rate_corrupt=0.004)
    budget, coverage, result = sweep_duplication_budget(cfg, target=0.5,
                                                        tolerance=0.3)
    assert 0 <= budget <= cfg.messages_per_trial
    assert abs(coverage - 0.5) <= 0.3
    assert result.config.duplication_budget == budget


def test_budget_sweep_fails_when_band_unreachable():
    cfg = _small_cfg(trials=2, rate_corrupt=0.0)
    with pytest.raises(ExperimentError):
        sweep_duplication_budget(cfg, target=0.9, tolerance=0.01)
