import numpy as np
import pytest

from dynalab.envs import Borderworld, GridPos, make_env
from dynalab.model import (PREDECESSOR, SUCCESSOR, ExactBorderModel, LearnedModel, Transition,
                           make_model, predict, update_model)

W, E = 3, 1


@pytest.fixture(scope="module")
def bw():
    return Borderworld()


def _border_adjacent_toward(env, pos):
    """Actions from a reachable cell that point straight into the border."""
    return [a for a in range(4) if env.is_border(env.shift(pos, a))]


def test_injected_successor_examples(bw):
    m = ExactBorderModel(bw, SUCCESSOR, inject=True)
    p = predict(m, GridPos(1, 1), W)
    assert p.state == (0, 1) and p.hallucinated and p.reward == 0.0 and not p.terminal
    p = predict(m, GridPos(3, 1), W)
    assert p.state == (2, 1) and not p.hallucinated


def test_exact_successor_stays_at_wall(bw):
    p = predict(ExactBorderModel(bw, SUCCESSOR), GridPos(1, 1), W)
    assert p.state == (1, 1) and not p.hallucinated


def test_injected_predecessor_example(bw):
    m = ExactBorderModel(bw, PREDECESSOR, inject=True)
    p = predict(m, GridPos(1, 1), E)
    assert p.state == (0, 1) and p.hallucinated
    # Mirror check: the cardinal move East from the predicted cell lands on the query.
    # (The injected successor model itself keeps border cells on the ring.)
    assert bw.shift(p.state, E) == (1, 1)


def test_injection_off_matches_true_dynamics(bw):
    m = ExactBorderModel(bw, SUCCESSOR)
    for s in bw.reachable_set:
        for a in range(4):
            nxt, r, term = bw.true_step(s, a)
            assert predict(m, s, a)[:3] == (nxt, r, term)


def test_injected_successor_differs_exactly_on_border_moves(bw):
    exact = ExactBorderModel(bw, SUCCESSOR)
    inj = ExactBorderModel(bw, SUCCESSOR, inject=True)
    differing = {(s, a) for s in bw.enumerate_states() for a in range(4)
                 if predict(inj, s, a) != predict(exact, s, a) or bw.is_border(s)}
    expected = {(s, a) for s in bw.reachable_set for a in _border_adjacent_toward(bw, s)}
    expected |= {(s, a) for s in bw.unreachable_set for a in range(4)}
    assert differing == expected
    for s in bw.reachable_set:
        for a in _border_adjacent_toward(bw, s):
            assert predict(inj, s, a) != predict(exact, s, a)


def test_hallucination_closure(bw):
    inj = ExactBorderModel(bw, SUCCESSOR, inject=True)
    for s in bw.unreachable_set:
        for a in range(4):
            p = predict(inj, s, a)
            assert p.state in bw.unreachable_set and p.hallucinated and p.reward == 0.0


def test_ring_moves_clamp_at_corners(bw):
    inj = ExactBorderModel(bw, SUCCESSOR, inject=True)
    assert predict(inj, GridPos(0, 0), W).state == (0, 0)
    assert predict(inj, GridPos(0, 0), E).state == (1, 0)
    assert predict(inj, GridPos(0, 5), 0).state == (0, 4)
    # Moving inward from the ring is blocked.
    assert predict(inj, GridPos(0, 5), E).state == (0, 5)


def test_hallucinated_flag_iff_border(bw):
    for direction in (SUCCESSOR, PREDECESSOR):
        for inject in (False, True):
            m = ExactBorderModel(bw, direction, inject)
            for s in bw.enumerate_states():
                for a in range(4):
                    p = predict(m, s, a)
                    assert p.hallucinated == bw.is_border(p.state)
                    assert np.isfinite(p.reward)


def test_exact_predecessor_inverts_true_dynamics(bw):
    m = ExactBorderModel(bw, PREDECESSOR)
    for s in bw.reachable_set:
        for a in range(4):
            p = predict(m, s, a)
            assert p.state in bw.reachable_set and not p.terminal
            if p.state != s:
                assert bw.true_step(p.state, a)[0] == s
                assert p.reward == (1.0 if s == bw.goal else 0.0)
            else:
                cand = GridPos(s.x - bw.shift((0, 0), a).x, s.y - bw.shift((0, 0), a).y)
                ok = (cand in bw.reachable_set and cand != bw.goal
                      and bw.true_step(cand, a)[0] == s)
                assert not ok


def test_injected_predecessor_differs_only_near_border(bw):
    exact = ExactBorderModel(bw, PREDECESSOR)
    inj = ExactBorderModel(bw, PREDECESSOR, inject=True)
    for s in bw.reachable_set:
        for a in range(4):
            if predict(inj, s, a) != predict(exact, s, a):
                dx, dy = bw.shift((0, 0), a)
                assert bw.is_border(GridPos(s.x - dx, s.y - dy))


def test_injected_predecessor_can_reenter_real_cells(bw):
    """Iterating the injected predecessor model leads from a real cell out and back in."""
    inj = ExactBorderModel(bw, PREDECESSOR, inject=True)
    out = predict(inj, GridPos(1, 3), E)
    assert out.state == (0, 3) and out.hallucinated
    back = predict(inj, out.state, W)
    assert back.state == (1, 3) and not back.hallucinated


def test_exact_model_update_is_noop(bw):
    m = ExactBorderModel(bw, SUCCESSOR, inject=True)
    before = dict(m._table)
    update_model(m, Transition(GridPos(1, 1), 1, 0.0, GridPos(2, 1), False))
    assert m._table == before


def test_learned_prediction_shape():
    env = make_env("puddleworld", rng=np.random.default_rng(0))
    m = LearnedModel(env, SUCCESSOR, rng=np.random.default_rng(1))
    p = predict(m, np.array([0.2, 0.3]), 2)
    assert p.state.shape == (2,) and np.isfinite(p.reward)
    assert m.net.sizes[-1] == env.state_dim + 1


def test_learned_direction_contract():
    env = make_env("puddleworld", rng=np.random.default_rng(0))
    s, s2 = np.array([0.2, 0.3]), np.array([0.25, 0.3])
    tr = Transition(s, 1, -1.0, s2, False)
    swapped = Transition(s2, 1, -1.0, s, False)
    pred = LearnedModel(env, PREDECESSOR, rng=np.random.default_rng(2))
    succ = LearnedModel(env, SUCCESSOR, rng=np.random.default_rng(2))
    x_p, y_p = pred.training_pair(tr)
    x_s, y_s = succ.training_pair(tr)
    # The predecessor model reads s', the successor model reads s.
    assert np.array_equal(x_p, succ.training_pair(swapped)[0])
    assert not np.array_equal(x_p, x_s)
    assert not np.array_equal(pred.training_pair(swapped)[1], y_p)
    assert np.array_equal(succ.training_pair(Transition(s, 1, -1.0, s, False))[0], x_s)


def test_learned_update_changes_weights():
    env = make_env("puddleworld", rng=np.random.default_rng(0))
    m = LearnedModel(env, SUCCESSOR, rng=np.random.default_rng(1))
    w0 = m.net.weights[0].copy()
    loss = update_model(m, Transition(np.array([0.2, 0.3]), 1, -1.0, np.array([0.25, 0.3]), False))
    assert loss >= 0.0 and not np.array_equal(w0, m.net.weights[0])


def test_learned_successor_fits_borderworld():
    env = Borderworld()
    rng = np.random.default_rng(0)
    m = LearnedModel(env, SUCCESSOR, lr=1e-2, rng=np.random.default_rng(1))
    interior = [s for s in env.reachable_set if not env.is_terminal(s)]
    for _ in range(10_000):
        s = interior[rng.integers(len(interior))]
        a = int(rng.integers(4))
        nxt, r, term = env.true_step(s, a)
        update_model(m, Transition(s, a, r, nxt, term))
    errs = []
    for s in interior:
        if min(s) >= 2 and max(s) <= 9:
            for a in range(4):
                nxt, _, _ = env.true_step(s, a)
                errs.append(np.max(np.abs(predict(m, s, a).state - np.array(nxt))))
    assert max(errs) < 0.5


def test_make_model_kinds(bw):
    assert make_model("exact", bw, SUCCESSOR).inject is False
    assert make_model("exact-hallucinating", bw, PREDECESSOR).inject is True
    assert isinstance(make_model("learned", bw, SUCCESSOR, rng=np.random.default_rng(0)),
                      LearnedModel)


@pytest.mark.parametrize("direction", [SUCCESSOR, PREDECESSOR])
def test_batched_predictions_match_single(direction):
    env = make_env("catcher", rng=np.random.default_rng(0))
    m = LearnedModel(env, direction, rng=np.random.default_rng(3))
    s = np.array([0.4, 0.2, 0.7])
    for a, p in enumerate(m.predict_actions(s, env.n_actions)):
        single = m.predict(s, a)
        assert np.allclose(p.state, single.state, atol=1e-12)
        assert p.reward == pytest.approx(single.reward, abs=1e-12)
        assert (p.terminal, p.hallucinated) == (single.terminal, single.hallucinated)
