"""Template construction, split evaluation, counters, light cones."""

import numpy as np
import pytest

from conftest import dense_template_unitary, random_unit_rows
from quatopt.circuits import (
    CircuitTemplate,
    Entangler,
    EvalCounter,
    GateSlot,
    brickwork_light_cones,
    build_template,
    column_blocks,
    energy_with_replacement,
    light_cones,
)
from quatopt.gatealg import to_matrix
from quatopt.models import local_z_observable, mixed_field_ising, observable_cost

IDENTITY_PARAMS = np.array([[1.0, 0.0, 0.0, 0.0]])

def identity_params(template):
    params = np.zeros((template.num_slots, 4))
    params[:, 0] = 1.0
    return params

@pytest.mark.parametrize(
    "family,n,layers,expected",
    [
        ("alternating", 4, 2, 16),
        ("alternating", 5, 3, 30),
        ("alternating", 2, 1, 4),
        ("cyclic", 5, 1, 10),
        ("cyclic", 3, 4, 15),
        ("ladder", 5, 1, 10),
        ("ladder", 4, 2, 12),
    ],
)
def test_slot_count_formulas(family, n, layers, expected):
    template = build_template(family, n, layers)
    assert template.num_slots == expected
    # ascending slot id equals ascending element position
    positions = [template.slot_position(d) for d in range(template.num_slots)]
    assert positions == sorted(positions)

def test_ladder_has_no_wrap_entangler():
    ladder = build_template("ladder", 5, 1)
    cyclic = build_template("cyclic", 5, 1)
    ladder_pairs = [(e.a, e.b) for e in ladder.elements if isinstance(e, Entangler)]
    cyclic_pairs = [(e.a, e.b) for e in cyclic.elements if isinstance(e, Entangler)]
    assert (4, 0) not in ladder_pairs
    assert (4, 0) in cyclic_pairs
    assert len(cyclic_pairs) == len(ladder_pairs) + 1

def test_alternating_brickwork_layout():
    template = build_template("alternating", 5, 1)
    pairs = [(e.a, e.b) for e in template.elements if isinstance(e, Entangler)]
    assert pairs == [(0, 1), (2, 3), (1, 2), (3, 4), (4, 0)]
    # second-column slot on qubit 0 carries the layer's last id
    slots = [e for e in template.elements if isinstance(e, GateSlot)]
    last = max(slots, key=lambda s: s.slot_id)
    assert (last.slot_id, last.qubit) == (9, 0)

def test_build_template_rejects_bad_requests():
    with pytest.raises(ValueError):
        build_template("alternating", 1, 1)
    with pytest.raises(ValueError):
        build_template("cyclic", 4, 0)
    with pytest.raises(ValueError):
        build_template("star", 4, 1)

def test_identity_slots_leave_zero_state():
    for family in ("alternating", "cyclic", "ladder"):
        template = build_template(family, 4, 2)
        state = template.prepare_state(identity_params(template))
        assert np.allclose(state.amplitudes[0], 1.0)

def test_single_slot_rig_x(single_slot_rig):
    state = single_slot_rig.prepare_state(np.array([[0.0, 1.0, 0.0, 0.0]]))
    assert abs(state.amplitudes[1]) == pytest.approx(1.0)

def test_prepare_state_matches_dense_unitary_oracle():
    rng = np.random.default_rng(17)
    for family in ("alternating", "cyclic", "ladder"):
        template = build_template(family, 3, 2)
        params = random_unit_rows(rng, template.num_slots)
        state = template.prepare_state(params)
        dense = dense_template_unitary(template, params)
        assert np.allclose(state.amplitudes, dense[:, 0], atol=1e-10)

def test_prepare_state_normalized_and_validates():
    rng = np.random.default_rng(18)
    template = build_template("cyclic", 4, 2)
    params = random_unit_rows(rng, template.num_slots)
    state = template.prepare_state(params)
    assert abs(np.linalg.norm(state.amplitudes) - 1.0) < 1e-9
    with pytest.raises(ValueError):
        template.prepare_state(params[:-1])
    with pytest.raises(ValueError):
        template.prepare_state(params * 2.0)

def test_self_replacement_consistency():
    # substituting a slot's own gate must reproduce the unmodified energy
    rng = np.random.default_rng(19)
    template = build_template("alternating", 4, 2)
    cost = observable_cost(mixed_field_ising(4))
    params = random_unit_rows(rng, template.num_slots)
    reference = cost(template.prepare_state(params))
    for slot_id in range(template.num_slots):
        val = energy_with_replacement(
            template, params, slot_id, to_matrix(params[slot_id]), cost, EvalCounter()
        )
        assert val == pytest.approx(reference, abs=1e-10)

def test_energy_with_replacement_counter_and_prefix():
    rng = np.random.default_rng(20)
    template = build_template("cyclic", 3, 2)
    cost = observable_cost(local_z_observable(3))
    params = random_unit_rows(rng, template.num_slots)
    counter = EvalCounter()
    gate = to_matrix(random_unit_rows(rng, 1)[0])
    plain = energy_with_replacement(template, params, 4, gate, cost, counter)
    assert counter.count == 1
    prefix = template.prefix_amplitudes(params, 4)
    via_prefix = energy_with_replacement(
        template, params, 4, gate, cost, counter, prefix=prefix
    )
    assert counter.count == 2
    assert via_prefix == pytest.approx(plain, abs=1e-14)

def test_energy_with_replacement_rejects_bad_input(single_slot_rig):
    cost = observable_cost(local_z_observable(1))
    with pytest.raises(ValueError):
        energy_with_replacement(
            single_slot_rig, IDENTITY_PARAMS, 1, np.eye(2), cost, EvalCounter()
        )
    with pytest.raises(ValueError):
        energy_with_replacement(
            single_slot_rig,
            IDENTITY_PARAMS,
            0,
            np.array([[1.0, 0.0], [0.0, 1.5]]),
            cost,
            EvalCounter(),
        )

def test_replacement_x_on_rig_gives_minus_one(single_slot_rig):
    cost = observable_cost(local_z_observable(1))
    val = energy_with_replacement(
        single_slot_rig,
        IDENTITY_PARAMS,
        0,
        np.array([[0, 1], [1, 0]], dtype=complex),
        cost,
        EvalCounter(),
    )
    assert val == pytest.approx(-1.0)

def test_prepare_from_matrices_matches_quaternion_path():
    rng = np.random.default_rng(21)
    template = build_template("ladder", 3, 1)
    params = random_unit_rows(rng, template.num_slots)
    mats = np.array([to_matrix(q) for q in params])
    a = template.prepare_state(params)
    b = template.prepare_from_matrices(mats)
    assert np.allclose(a.amplitudes, b.amplitudes, atol=1e-12)

# --- light cones ------------------------------------------------------------

def bfs_block_cone_oracle(n, num_columns, start_column, start_block, direction):
    """Independent oracle: explicit block graph, breadth-first traversal."""
    nodes = {
        (c, i): set(blk)
        for c in range(num_columns)
        for i, blk in enumerate(column_blocks(c, n))
    }
    frontier = [(start_column, start_block)]
    qubits = set(nodes[frontier[0]])
    cols = (
        range(start_column + 1, num_columns)
        if direction == "forward"
        else range(start_column - 1, -1, -1)
    )
    for c in cols:
        joined = [
            (c, i) for i, blk in enumerate(column_blocks(c, n)) if qubits & set(blk)
        ]
        for node in joined:
            qubits |= nodes[node]
    return qubits

def test_light_cone_final_layer_slot_is_own_block():
    template = build_template("alternating", 4, 2)
    last_slot = template.num_slots - 1  # second column of the last layer, qubit 0
    cones = light_cones(template, last_slot)
    assert cones.column == cones.num_columns - 1
    assert cones.forward_qubits == frozenset(cones.block)

def test_light_cone_single_layer_backward_is_own_block():
    template = build_template("alternating", 4, 1)
    cones = light_cones(template, 0)
    assert cones.backward_qubits == frozenset({0, 1})

def test_light_cone_growth_and_pairs_n4():
    template = build_template("alternating", 4, 1)  # two brickwork columns
    cones = light_cones(template, 0)
    assert cones.block == (0, 1)
    assert cones.forward_qubits == frozenset({0, 1, 2, 3})
    assert cones.subsystems == ((1, 2), (3, 0))
    assert cones.backward_pairs == ((0, 0), (0, 1), (1, 1))
    assert cones.subsystem_range_qubits(0, 1) == (1, 2, 3, 0)

def test_light_cone_matches_bfs_oracle():
    for n in (4, 6, 8):
        for layers in (1, 2, 3):
            template = build_template("alternating", n, layers)
            for slot_id in range(0, template.num_slots, 3):
                cones = light_cones(template, slot_id)
                blocks = column_blocks(cones.column, n)
                b_idx = blocks.index(cones.block)
                fwd = bfs_block_cone_oracle(n, cones.num_columns, cones.column, b_idx, "forward")
                bwd = bfs_block_cone_oracle(n, cones.num_columns, cones.column, b_idx, "backward")
                assert cones.forward_qubits == frozenset(fwd)
                assert cones.backward_qubits == frozenset(bwd)

def test_light_cone_saturation_by_column():
    # n=8: the forward qubit set grows by two qubits per column until saturating
    cones = brickwork_light_cones(8, 4, 0, 0)
    sizes = []
    qubits = set(cones.block)
    for c in range(1, 4):
        partial = brickwork_light_cones(8, c + 1, 0, 0)
        sizes.append(len(partial.forward_qubits))
    assert sizes == [4, 6, 8]

def test_light_cone_rejects_unsupported_template():
    with pytest.raises(ValueError):
        light_cones(build_template("cyclic", 4, 1), 0)
    with pytest.raises(ValueError):
        light_cones(build_template("alternating", 5, 1), 0)

def test_eval_counter_monotone():
    counter = EvalCounter()
    counter.increment()
    counter.increment(3)
    assert counter.count == 4


def test_negated_quaternion_gives_same_energy():
    # -q is the same gate up to a global phase, so every cost agrees
    rng = np.random.default_rng(23)
    template = build_template("alternating", 3, 1)
    cost = observable_cost(mixed_field_ising(3))
    params = random_unit_rows(rng, template.num_slots)
    baseline = cost(template.prepare_state(params))
    flipped = params.copy()
    flipped[2] = -flipped[2]
    assert cost(template.prepare_state(flipped)) == pytest.approx(baseline, abs=1e-12)
