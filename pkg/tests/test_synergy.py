import numpy as np
import pytest

from core.errors import ParameterError, StructuralError
from core.nmf import SynergySet
from core.signal_model import Condition, ForceTrace, PositionTrace
from core.synergy import (
    build_command_stream,
    condition_indices,
    force_command,
    normalize_interchannel,
    position_command,
    select_force_synergy,
    split_by_condition,
)
from core.synthgen import SynthSpec, generate


def _set(W, C):
    W = np.asarray(W, dtype=float)
    C = np.asarray(C, dtype=float)
    return SynergySet(W=W, C=C, vaf=1.0)


def _activations(C):
    C = np.atleast_2d(np.asarray(C, dtype=float))
    return _set(np.ones((2, C.shape[0])), C)


def test_normalize_hand_computed():
    s = normalize_interchannel(_set([[2.0], [4.0]], [[1.0, 3.0]]))
    assert s.W.ravel().tolist() == [0.5, 1.0]
    assert s.C.ravel().tolist() == [4.0, 12.0]
    assert np.allclose(s.reconstruct(), [[2.0, 6.0], [4.0, 12.0]], rtol=0, atol=1e-12)


def test_normalize_max_one_column_unchanged(rng):
    W = rng.random((5, 2))
    W /= W.max(axis=0)
    C = rng.random((2, 7))
    s = normalize_interchannel(_set(W, C))
    assert np.array_equal(s.W, W)
    assert np.array_equal(s.C, C)


def test_normalize_preserves_reconstruction(rng):
    for _ in range(100):
        W = rng.random((16, 3)) * rng.uniform(0.1, 10.0)
        C = rng.random((3, 40))
        s = _set(W, C)
        out = normalize_interchannel(s)
        assert np.linalg.norm(s.reconstruct() - out.reconstruct()) < 1e-10
        assert np.allclose(out.W.max(axis=0), 1.0)


def test_normalize_skips_zero_column(rng):
    W = rng.random((4, 3))
    W[:, 1] = 0.0
    C = rng.random((3, 6))
    out = normalize_interchannel(_set(W, C))
    assert out.zero_columns == (1,)
    assert np.array_equal(out.C[1], C[1])
    assert np.all(out.W[:, 1] == 0.0)


@pytest.mark.parametrize("method", ["normalized", "correlation"])
def test_normalize_keeps_selection_for_scale_free_scores(rng, method):
    for _ in range(100):
        s = _set(rng.random((16, 3)) * 5.0, rng.random((3, 50)))
        F_h = ForceTrace(rng.random(50))
        before = select_force_synergy(F_h, s, method).index
        after = select_force_synergy(F_h, normalize_interchannel(s), method).index
        assert before == after


def test_normalize_keeps_projection_selection_on_disjoint_activations(rng):
    """激活曲线互不重叠且 F_h 落在其中一条的支撑上时, 投影选择不受归一化影响"""
    for _ in range(100):
        C = np.zeros((3, 60))
        for i in range(3):
            C[i, i * 20:(i + 1) * 20] = rng.random(20) + 0.01
        target = int(rng.integers(3))
        F_h = ForceTrace(C[target] * rng.uniform(1.0, 50.0))
        s = _set(rng.random((16, 3)) * rng.uniform(0.01, 100.0, 3), C)
        before = select_force_synergy(F_h, s)
        after = select_force_synergy(F_h, normalize_interchannel(s))
        assert before.index == after.index == target + 1


def test_select_orthogonal_indicator():
    selection = select_force_synergy(ForceTrace([1.0, 0.0]), _activations([[1.0, 0.0], [0.0, 1.0]]))
    assert selection.index == 1
    assert selection.score == 1.0
    assert selection.all_scores == (1.0, 0.0)


def test_select_matches_brute_force_argmax(rng):
    for _ in range(1000):
        C = rng.random((3, 50))
        F_h = rng.random(50)
        scores = [float(np.dot(F_h, C[i])) for i in range(3)]
        best = max(range(3), key=lambda i: (scores[i], -i))
        assert select_force_synergy(ForceTrace(F_h), _activations(C)).index == best + 1


def test_select_tie_goes_to_lowest_index():
    selection = select_force_synergy(ForceTrace([1.0, 1.0]), _activations([[0.0, 1.0], [1.0, 0.0]]))
    assert selection.index == 1


def test_select_length_mismatch():
    with pytest.raises(StructuralError):
        select_force_synergy(ForceTrace([1.0, 2.0, 3.0]), _activations([[1.0, 0.0]]))


def test_select_unknown_method():
    with pytest.raises(ParameterError):
        select_force_synergy(ForceTrace([1.0]), _activations([[1.0]]), "mutual_information")


@pytest.mark.parametrize("force_synergy_index", [1, 2, 3])
@pytest.mark.parametrize("seed", range(3))
def test_select_recovers_generator_truth_on_perfect_fit(seed, force_synergy_index):
    dataset = generate(SynthSpec(seed=seed, force_synergy_index=force_synergy_index))
    s = _set(dataset.W_true, dataset.C_true)
    assert select_force_synergy(dataset.F_h_true, s).index == dataset.selection_true


@pytest.mark.parametrize("alpha,c,expected", [
    (1.0, [0.2, 0.4], [0.2, 0.4]),
    (20.0, [0.0, 0.05], [0.0, 1.0]),
])
def test_force_command_scales_activation(alpha, c, expected):
    s = _activations([c])
    f_hat = force_command(select_force_synergy(ForceTrace([1.0, 1.0]), s), s, alpha)
    assert np.allclose(f_hat.values, expected, rtol=0, atol=1e-12)


def test_force_command_is_linear_in_alpha(rng):
    s = _activations(rng.random((3, 30)))
    selection = select_force_synergy(ForceTrace(rng.random(30)), s)
    single = force_command(selection, s, 7.0)
    double = force_command(selection, s, 14.0)
    assert np.allclose(double.values, 2.0 * single.values, rtol=0, atol=1e-12)
    assert np.allclose(single.values, 7.0 * s.C[selection.index - 1], rtol=0, atol=1e-12)


@pytest.mark.parametrize("alpha", [0.0, -1.0])
def test_force_command_rejects_non_positive_alpha(alpha):
    s = _activations([[1.0]])
    with pytest.raises(ParameterError):
        force_command(select_force_synergy(ForceTrace([1.0]), s), s, alpha)


def test_force_command_ranges_for_weak_and_strong_presses():
    dataset = generate(SynthSpec(weak_strong_scale=(0.005, 0.075), noise_snr_db=float("inf")))
    s = _set(dataset.W_true, dataset.C_true)
    selection = select_force_synergy(dataset.F_h_true, s)
    f_hat = force_command(selection, s, 20.0)
    lengths = dataset.trial_set.lengths
    streams = split_by_condition(
        f_hat, PositionTrace(np.zeros((2, f_hat.k))), 20.0, lengths, dataset.conditions
    )
    strong = streams[Condition.STRONG].force.values
    weak = streams[Condition.WEAK].force.values
    assert 0.0 <= strong.min() and strong.max() <= 1.5 + 1e-12
    assert 0.0 <= weak.min() and weak.max() <= 0.1 + 1e-12
    assert strong.max() / weak.max() == pytest.approx(15.0)


def test_position_command_passes_through():
    line = PositionTrace(np.vstack([np.linspace(0.0, 0.3, 11), np.zeros(11)]))
    out = position_command(line)
    assert np.array_equal(out.points, line.points)


def test_build_command_stream():
    stream = build_command_stream(ForceTrace(np.ones(5)), PositionTrace(np.zeros((2, 5))), 20.0)
    assert len(stream) == 5
    assert stream.condition is Condition.UNLABELED
    assert stream.segments == [(0, 5)]


def test_build_command_stream_length_mismatch():
    with pytest.raises(StructuralError):
        build_command_stream(ForceTrace(np.ones(5)), PositionTrace(np.zeros((2, 6))), 20.0)


def test_build_command_stream_bad_trial_lengths():
    with pytest.raises(StructuralError):
        build_command_stream(ForceTrace(np.ones(5)), PositionTrace(np.zeros((2, 5))), 1.0, trial_lengths=[2, 2])


def test_condition_indices_keeps_trial_order():
    parts = condition_indices([2, 3, 1], [Condition.WEAK, Condition.STRONG, Condition.WEAK])
    assert [p.tolist() for p in parts[Condition.WEAK]] == [[0, 1], [5]]
    assert [p.tolist() for p in parts[Condition.STRONG]] == [[2, 3, 4]]


def test_split_by_condition():
    force = ForceTrace(np.arange(6, dtype=float), "F_hat")
    position = PositionTrace(np.vstack([np.arange(6.0), -np.arange(6.0)]))
    streams = split_by_condition(
        force, position, 20.0, [2, 3, 1], [Condition.WEAK, Condition.STRONG, Condition.WEAK]
    )
    weak = streams[Condition.WEAK]
    strong = streams[Condition.STRONG]
    assert weak.force.values.tolist() == [0.0, 1.0, 5.0]
    assert weak.position.y.tolist() == [-0.0, -1.0, -5.0]
    assert weak.force.label == "F_hat_weak"
    assert weak.segments == [(0, 2), (2, 3)]
    assert strong.force.values.tolist() == [2.0, 3.0, 4.0]
    assert strong.condition is Condition.STRONG


def test_split_by_condition_length_mismatch():
    with pytest.raises(StructuralError):
        split_by_condition(
            ForceTrace(np.ones(4)), PositionTrace(np.zeros((2, 4))), 1.0, [2, 3],
            [Condition.WEAK, Condition.STRONG],
        )


def test_selection_invariant_under_force_rescaling(rng):
    for _ in range(100):
        s = _activations(rng.random((3, 40)))
        F_h = rng.random(40)
        scale = rng.uniform(1e-3, 1e3)
        a = select_force_synergy(ForceTrace(F_h), s).index
        b = select_force_synergy(ForceTrace(scale * F_h), s).index
        assert a == b


def test_normalize_is_idempotent(rng):
    once = normalize_interchannel(_set(rng.random((6, 3)) * 4.0, rng.random((3, 10))))
    twice = normalize_interchannel(once)
    assert np.array_equal(once.W, twice.W)
    assert np.array_equal(once.C, twice.C)


def test_force_command_is_non_negative(rng):
    s = _activations(rng.random((3, 25)))
    f_hat = force_command(select_force_synergy(ForceTrace(rng.random(25)), s), s, 20.0)
    assert np.all(f_hat.values >= 0)
