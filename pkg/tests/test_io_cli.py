"""Circuit and state file round trips plus the command line interface.

The CLI is exercised through ``main(argv)`` so exit codes and report
documents are checked exactly as a shell user would see them, including
the byte-stability guarantee for ``--json`` output and the rule that
every witness embedded in a report re-verifies against the library.
"""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from qaclab import (
    CircuitValidationError,
    QacCircuit,
    QuantumState,
    compose_product,
    random_unitary_haar,
    reduced_density,
    run_circuit,
    trace_distance,
)
from qaclab.circuit_io import (
    canonical_json,
    circuit_to_json_dict,
    parse_circuit,
    parse_state,
    serialize_circuit,
    serialize_state,
)
from qaclab.cli import main
from qaclab.states import HADAMARD

from conftest import parity3_circuit, random_circuit

BELL = np.array([1, 0, 0, 1], dtype=np.complex128) / np.sqrt(2.0)

MINIMAL_CIRCUIT = '{"qubits": 2, "inputs": 2, "layers": [{"kind": "multi", "csign": [[1, 2]]}]}'


def cnot_circuit() -> QacCircuit:
    return QacCircuit(2, 2, ({1: HADAMARD}, {1: HADAMARD}), ((frozenset({1, 2}),),))


def write(tmp_path, name: str, text: str) -> str:
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run_cli(capsys, argv: list[str]) -> tuple[int, str, str]:
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, argv: list[str]) -> tuple[int, dict]:
    code, out, _ = run_cli(capsys, ["--json", *argv])
    return code, json.loads(out)


class TestCanonicalJson:
    def test_scalars(self) -> None:
        assert canonical_json(None) == "null"
        assert canonical_json(True) == "true"
        assert canonical_json(False) == "false"
        assert canonical_json(5) == "5"
        assert canonical_json(np.int64(5)) == "5"
        assert canonical_json("a b") == '"a b"'

    def test_floats_use_17_significant_digits(self) -> None:
        assert canonical_json(1.0) == "1"
        assert canonical_json(0.1) == "0.10000000000000001"
        assert canonical_json(np.float64(0.5)) == "0.5"

    def test_negative_zero_is_normalized(self) -> None:
        assert canonical_json(-0.0) == "0"

    def test_nan_and_inf_are_rejected(self) -> None:
        with pytest.raises(ValueError, match="NaN or infinite"):
            canonical_json(float("nan"))
        with pytest.raises(ValueError, match="NaN or infinite"):
            canonical_json([1.0, float("inf")])

    def test_complex_becomes_a_pair(self) -> None:
        assert canonical_json(1 + 2j) == "[1,2]"
        assert canonical_json(np.complex128(1j)) == "[0,1]"

    def test_containers_and_key_order(self) -> None:
        assert canonical_json({"b": 1, "a": [2, 3]}) == '{"b":1,"a":[2,3]}'
        assert canonical_json((1, 2)) == "[1,2]"
        assert canonical_json(np.arange(3)) == "[0,1,2]"

    def test_unsupported_type_is_rejected(self) -> None:
        with pytest.raises(TypeError, match="cannot serialize"):
            canonical_json({1, 2})

    def test_parse_then_reserialize_is_identity(self) -> None:
        text = canonical_json({"x": 0.1, "y": [1e-9, -0.0], "z": "s"})
        assert canonical_json(json.loads(text)) == text


class TestCircuitFiles:
    def test_minimal_multi_only_file(self) -> None:
        circuit = parse_circuit(MINIMAL_CIRCUIT)
        assert circuit.n_qubits == 2
        assert circuit.n_inputs == 2
        assert circuit.depth == 1
        assert circuit.csign_layers == ((frozenset({1, 2}),),)
        assert circuit.single_layers == ({}, {})

    def test_zyz_entry_materializes_to_a_matrix(self) -> None:
        text = json.dumps(
            {
                "qubits": 1,
                "inputs": 1,
                "layers": [
                    {
                        "kind": "single",
                        "gates": [{"q": 1, "zyz": [math.pi / 2, math.pi / 2, 0.0, math.pi]}],
                    }
                ],
            }
        )
        circuit = parse_circuit(text)
        assert np.allclose(circuit.single_layers[0][1], HADAMARD, atol=1e-12)

    def test_implied_empty_single_layers(self) -> None:
        text = json.dumps(
            {
                "qubits": 3,
                "inputs": 3,
                "layers": [
                    {"kind": "multi", "csign": [[1, 2]]},
                    {"kind": "multi", "csign": [[2, 3]]},
                ],
            }
        )
        circuit = parse_circuit(text)
        assert circuit.depth == 2
        assert circuit.single_layers == ({}, {}, {})

    def test_two_single_layers_in_a_row_are_rejected(self) -> None:
        layer = {"kind": "single", "gates": []}
        text = json.dumps({"qubits": 1, "inputs": 1, "layers": [layer, layer]})
        with pytest.raises(ValueError, match="two single-qubit layers"):
            parse_circuit(text)

    def test_duplicate_qubit_within_a_layer_is_rejected(self) -> None:
        gate = {"q": 1, "matrix": [[[0, 0], [1, 0]], [[1, 0], [0, 0]]]}
        text = json.dumps(
            {"qubits": 1, "inputs": 1, "layers": [{"kind": "single", "gates": [gate, gate]}]}
        )
        with pytest.raises(ValueError, match="duplicate gate for qubit 1"):
            parse_circuit(text)

    def test_overlapping_supports_are_rejected(self) -> None:
        text = json.dumps(
            {
                "qubits": 3,
                "inputs": 3,
                "layers": [{"kind": "multi", "csign": [[1, 2], [2, 3]]}],
            }
        )
        with pytest.raises(CircuitValidationError):
            parse_circuit(text)

    def test_non_unitary_single_is_rejected(self) -> None:
        gate = {"q": 1, "matrix": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]}
        text = json.dumps(
            {"qubits": 1, "inputs": 1, "layers": [{"kind": "single", "gates": [gate]}]}
        )
        with pytest.raises(CircuitValidationError):
            parse_circuit(text)

    @pytest.mark.parametrize(
        "mutate, message",
        [
            (lambda d: d.pop("layers"), "missing 'layers'"),
            (lambda d: d["layers"].append({"kind": "mixed"}), "must be 'single' or 'multi'"),
            (
                lambda d: d["layers"].insert(
                    0, {"kind": "single", "gates": [{"q": 1, "matrix": [[0, 1]]}]}
                ),
                "must have 2 rows",
            ),
            (
                lambda d: d["layers"].insert(
                    0, {"kind": "single", "gates": [{"q": 1, "zyz": [0.0, 0.0]}]}
                ),
                "beta, theta, phi, lam",
            ),
            (
                lambda d: d["layers"].insert(0, {"kind": "single", "gates": [{"matrix": []}]}),
                "must be an object with 'q'",
            ),
        ],
    )
    def test_malformed_files_are_rejected(self, mutate, message) -> None:
        data = json.loads(MINIMAL_CIRCUIT)
        mutate(data)
        with pytest.raises(ValueError, match=message):
            parse_circuit(json.dumps(data))

    def test_bare_numbers_are_accepted_as_real_entries(self) -> None:
        text = json.dumps(
            {
                "qubits": 1,
                "inputs": 1,
                "layers": [
                    {"kind": "single", "gates": [{"q": 1, "matrix": [[0, 1], [1, 0]]}]}
                ],
            }
        )
        circuit = parse_circuit(text)
        assert np.array_equal(circuit.single_layers[0][1], [[0, 1], [1, 0]])

    def test_serializer_emits_sorted_matrices_and_skips_empty_singles(self) -> None:
        circuit = QacCircuit(
            2,
            2,
            ({2: HADAMARD, 1: HADAMARD}, {}),
            ((frozenset({1, 2}),),),
        )
        data = circuit_to_json_dict(circuit)
        assert [layer["kind"] for layer in data["layers"]] == ["single", "multi"]
        assert [entry["q"] for entry in data["layers"][0]["gates"]] == [1, 2]
        assert all("matrix" in entry for entry in data["layers"][0]["gates"])
        assert data["layers"][1]["csign"] == [[1, 2]]

    @pytest.mark.parametrize(
        "circuit",
        [
            cnot_circuit(),
            parity3_circuit(),
            random_circuit(3, 2, (({1, 2},), ({2, 3},)), seed=11),
        ],
        ids=["cnot", "parity3", "random"],
    )
    def test_serialize_parse_is_a_fixed_point(self, circuit) -> None:
        text = serialize_circuit(circuit)
        again = parse_circuit(text)
        assert serialize_circuit(again) == text
        assert again.csign_layers == circuit.csign_layers


class TestStateFiles:
    def test_round_trip_preserves_amplitudes_exactly(self) -> None:
        state = QuantumState.normalized(
            np.array([0.3 + 0.1j, -0.2j, 0.5, 0.7], dtype=np.complex128)
        )
        again = parse_state(serialize_state(state))
        assert np.array_equal(again.amplitudes, state.amplitudes)
        assert again.n_qubits == 2

    def test_qubit_count_mismatch_is_rejected(self) -> None:
        with pytest.raises(ValueError, match="'qubits' says 3"):
            parse_state('{"qubits": 3, "amplitudes": [[1, 0], [0, 0]]}')

    def test_missing_amplitudes_key_is_rejected(self) -> None:
        with pytest.raises(ValueError, match="'amplitudes'"):
            parse_state('{"qubits": 1}')

    def test_unnormalized_amplitudes_are_rejected(self) -> None:
        with pytest.raises(ValueError):
            parse_state('{"amplitudes": [[1, 0], [1, 0]]}')


class TestCliSimulate:
    def test_human_output_names_the_final_state(self, capsys, tmp_path) -> None:
        path = write(tmp_path, "cnot.json", serialize_circuit(cnot_circuit()))
        code, out, _ = run_cli(capsys, ["simulate", path, "--input", "11"])
        assert code == 0
        assert "|01>" in out
        assert "exit 0" in out

    def test_json_report_fields(self, capsys, tmp_path) -> None:
        path = write(tmp_path, "cnot.json", serialize_circuit(cnot_circuit()))
        code, report = run_json(capsys, ["simulate", path, "--input", "11"])
        assert code == 0
        assert report["schema"] == 1
        assert report["command"] == "simulate"
        assert report["exit_code"] == 0
        assert report["timing_ms"] is None
        assert report["circuit"]["path"] == path
        assert len(report["circuit"]["sha256"]) == 64
        amps = [complex(re, im) for re, im in report["final_state"]["amplitudes"]]
        assert abs(amps[0b01] - 1) < 1e-12

    def test_report_key_order_is_fixed(self, capsys, tmp_path) -> None:
        path = write(tmp_path, "cnot.json", serialize_circuit(cnot_circuit()))
        _, report = run_json(capsys, ["simulate", path, "--input", "00"])
        keys = list(report)
        assert keys[:5] == ["schema", "command", "tol", "seed", "exit_code"]
        assert keys[-1] == "timing_ms"

    def test_trace_includes_every_layer_boundary(self, capsys, tmp_path) -> None:
        path = write(tmp_path, "cnot.json", serialize_circuit(cnot_circuit()))
        _, report = run_json(capsys, ["simulate", path, "--input", "10", "--trace"])
        assert len(report["boundaries"]) == 4
        assert report["boundaries"][0]["amplitudes"][0b10] == [1, 0]

    def test_wrong_input_length_exits_2(self, capsys, tmp_path) -> None:
        path = write(tmp_path, "cnot.json", serialize_circuit(cnot_circuit()))
        code, _, err = run_cli(capsys, ["simulate", path, "--input", "101"])
        assert code == 2
        assert "ValueError" in err


class TestCliChecks:
    def test_clean_parity_passes(self, capsys, tmp_path) -> None:
        path = write(tmp_path, "cnot.json", serialize_circuit(cnot_circuit()))
        code, report = run_json(capsys, ["check-clean", path, "--target", "parity"])
        assert code == 0
        assert report["passed"] is True
        assert report["max_distance"] < 1e-12
        assert len(report["distances"]) == 4

    def test_clean_failure_reports_the_worst_input(self, capsys, tmp_path) -> None:
        path = write(tmp_path, "empty.json", serialize_circuit(QacCircuit(2, 2, ({},), ())))
        code, report = run_json(capsys, ["check-clean", path, "--target", "parity"])
        assert code == 1
        assert report["exit_code"] == 1
        assert report["passed"] is False
        assert report["worst_input"] == {"1": 0, "2": 1}
        assert report["max_distance"] == pytest.approx(math.sqrt(2.0))

    def test_clean_against_a_unitary_file(self, capsys, tmp_path) -> None:
        cpath = write(tmp_path, "cnot.json", serialize_circuit(cnot_circuit()))
        cnot = [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]]
        tpath = write(tmp_path, "target.json", json.dumps({"unitary": cnot}))
        code, report = run_json(capsys, ["check-clean", cpath, "--target", tpath])
        assert code == 0
        assert report["target"]["path"] == tpath

    def test_weak_parity_passes_on_a_parity_circuit(self, capsys, tmp_path) -> None:
        path = write(tmp_path, "parity3.json", serialize_circuit(parity3_circuit()))
        code, report = run_json(capsys, ["check-weak", path])
        assert code == 0
        assert report["max_leakage"] < 1e-12

    def test_weak_parity_failure(self, capsys, tmp_path) -> None:
        path = write(tmp_path, "empty.json", serialize_circuit(QacCircuit(2, 2, ({},), ())))
        code, report = run_json(capsys, ["check-weak", path])
        assert code == 1
        assert report["leakages"] == [0, 1, 0, 1]

    def test_tolerance_flag_is_echoed_and_applied(self, capsys, tmp_path) -> None:
        path = write(tmp_path, "empty.json", serialize_circuit(QacCircuit(2, 2, ({},), ())))
        code, report = run_json(capsys, ["--tol", "2", "check-clean", path])
        assert code == 0
        assert report["tol"] == 2.0


class TestCliAnalysis:
    def test_separability_separable_state(self, capsys, tmp_path) -> None:
        state = compose_product([((1,), np.array([0.0, 1.0])), ((2, 3), BELL)])
        path = write(tmp_path, "state.json", serialize_state(state))
        code, report = run_json(capsys, ["separability", path, "--subset", "1,2"])
        assert code == 0
        assert report["separable"] is True
        assert report["witness"] == [[1], [2, 3]]

    def test_separability_entangled_state(self, capsys, tmp_path) -> None:
        ghz = QuantumState.normalized(np.array([1, 0, 0, 0, 0, 0, 0, 1], dtype=complex))
        path = write(tmp_path, "ghz.json", serialize_state(ghz))
        code, report = run_json(capsys, ["separability", path, "--subset", "1,2"])
        assert code == 0
        assert report["separable"] is False
        assert report["witness"] is None
        assert set(report["evidence"]) == {"1", "1,3"}
        for value in report["evidence"].values():
            assert value == pytest.approx(1 / math.sqrt(2.0))

    def test_simplify_reports_pinned_qubits(self, capsys, tmp_path) -> None:
        state = QuantumState.normalized(
            np.array([0, 0, 0, 0, 0, 1, 0, 1], dtype=complex)
        )
        path = write(tmp_path, "state.json", serialize_state(state))
        code, report = run_json(capsys, ["simplify", path, "--subset", "1,2,3"])
        assert code == 0
        assert report["kind"] == "simplifies"
        assert report["target"] == [2]
        assert report["pinned"] == [1, 3]
        assert report["ones_mass"] == pytest.approx(0.5)

    def test_lemma_entanglement_holds(self, capsys, tmp_path) -> None:
        plus2 = QuantumState.normalized(np.ones(4, dtype=complex))
        path = write(tmp_path, "plus.json", serialize_state(plus2))
        code, report = run_json(
            capsys, ["lemma-entanglement", path, "--subset", "1,2", "--eta", "i"]
        )
        assert code == 0
        assert report["holds"] is True
        assert report["output_entangled"] is True
        assert report["simplifies"] is False


class TestCliWitnesses:
    def test_random_killer_state_reverifies(self, capsys, tmp_path) -> None:
        code, report = run_json(
            capsys, ["--seed", "5", "kill-parity", "--random", "3", "2"]
        )
        assert code == 0
        amps = np.array(
            [complex(re, im) for re, im in report["state"]["amplitudes"]]
        )
        assert abs(np.linalg.norm(amps) - 1) < 1e-9
        prefix = np.eye(8, dtype=np.complex128)
        for i in range(2):
            prefix = random_unitary_haar(8, 5 + i) @ prefix
            assert abs((prefix @ amps)[-1]) < 1e-9
        parities = np.array([bin(j).count("1") % 2 for j in range(8)])
        assert np.linalg.norm(amps[parities == 1]) < 1e-9

    def test_killer_with_no_unitaries_needs_the_qubit_count(self, capsys, tmp_path) -> None:
        path = write(tmp_path, "empty.json", json.dumps({"matrices": [], "qubits": 3}))
        code, report = run_json(
            capsys, ["kill-parity", "--unitaries", path, "--parity-bit", "0"]
        )
        assert code == 0
        assert report["residuals"] == []
        amps = [complex(re, im) for re, im in report["state"]["amplitudes"]]
        assert amps[0] == 1

    def test_unitaries_file_without_matrices_exits_2(self, capsys, tmp_path) -> None:
        path = write(tmp_path, "bad.json", json.dumps({"qubits": 3}))
        code, report = run_json(capsys, ["kill-parity", "--unitaries", path])
        assert code == 2
        assert "KeyError" in report["error"]

    def test_refute_depth1_witness_reverifies(self, capsys, tmp_path) -> None:
        path = write(tmp_path, "bare.json", MINIMAL_TRIPLE)
        code, report = run_json(capsys, ["refute-depth1", path])
        assert code == 1
        assert report["kind"] == "killer"
        assert report["toggle_qubit"] == 3
        assert report["committed"] == [1, 2]
        killer = np.array(
            [complex(re, im) for re, im in report["killer"]["amplitudes"]]
        )
        circuit = parse_circuit(MINIMAL_TRIPLE)
        densities = []
        for bit in (0.0, 1.0):
            toggle = np.array([1.0 - bit, bit])
            state = compose_product([((1, 2), killer), ((3,), toggle)])
            densities.append(reduced_density(run_circuit(circuit, state).final, [1]))
        assert trace_distance(*densities) < 1e-9
        assert report["max_trace_distance"] < 1e-9

    def test_refute_depth1_not_applicable_below_3_inputs(self, capsys, tmp_path) -> None:
        path = write(tmp_path, "cnot.json", serialize_circuit(cnot_circuit()))
        code, report = run_json(capsys, ["refute-depth1", path])
        assert code == 0
        assert report["applicable"] is False


MINIMAL_TRIPLE = '{"qubits": 3, "inputs": 3, "layers": [{"kind": "multi", "csign": [[1, 2, 3]]}]}'

FROZEN_2SETS = {
    "eta": -1,
    "a": [[0, 0], [1, 0]],
    "b": [[0.3, 0], [1, 0]],
    "c": [[0, 0], [1, 0]],
    "d": [[0.3, 0], [-1, 0]],
}


class TestCliProductSystem:
    def test_generated_instance_passes(self, capsys) -> None:
        code, report = run_json(
            capsys,
            ["--seed", "7", "product-system", "--case", "3sets", "--branch", "d"],
        )
        assert code == 0
        assert report["hypotheses_ok"] is True
        assert report["applicable"] is True
        assert report["conclusion_ok"] is True
        assert report["vanishing_side"] == "d"

    def test_values_file_passes(self, capsys, tmp_path) -> None:
        path = write(tmp_path, "values.json", json.dumps(FROZEN_2SETS))
        code, report = run_json(
            capsys, ["product-system", "--case", "2sets", "--values", path]
        )
        assert code == 0
        assert report["vanishing_side"] is None
        assert report["max_hypothesis_residual"] < 1e-12

    def test_perturbed_values_are_flagged(self, capsys, tmp_path) -> None:
        values = json.loads(json.dumps(FROZEN_2SETS))
        values["d"][0][0] += 1e-3
        path = write(tmp_path, "values.json", json.dumps(values))
        code, report = run_json(
            capsys, ["product-system", "--case", "2sets", "--values", path]
        )
        assert code == 1
        assert report["hypotheses_ok"] is False
        assert report["max_hypothesis_residual"] == pytest.approx(1e-3)


class TestCliSearch:
    def test_search_depth2_finds_two_bit_parity(self, capsys) -> None:
        argv = [
            "--seed", "3",
            "search-depth2",
            "--layer1", "1,2",
            "--layer2", "1,2",
            "-n", "2",
            "-m", "2",
            "--restarts", "4",
            "--budget-iters", "200",
        ]
        code, report = run_json(capsys, argv)
        assert code == 0
        assert report["best_loss"] < 1e-10
        assert report["best_loss"] == min(report["restart_losses"])
        assert len(report["restart_losses"]) == 4

    def test_search_reports_are_byte_identical(self, capsys) -> None:
        argv = [
            "--json", "--seed", "3",
            "search-depth2",
            "--layer1", "1,2",
            "--layer2", "1,2",
            "-n", "2",
            "-m", "2",
            "--restarts", "2",
            "--budget-iters", "60",
        ]
        _, first, _ = run_cli(capsys, argv)
        _, second, _ = run_cli(capsys, argv)
        assert first == second

    def test_sweep_covers_the_catalog(self, capsys) -> None:
        argv = [
            "sweep",
            "-n", "3",
            "--m-max", "3",
            "--restarts", "1",
            "--budget-iters", "1",
        ]
        code, report = run_json(capsys, argv)
        assert code == 0
        assert report["topology_count"] == 8
        losses = [entry["best_loss"] for entry in report["ranking"]]
        assert losses == sorted(losses)
        assert isinstance(report["evidence_note"], str) and report["evidence_note"]

    def test_empty_topology_layer_exits_2(self, capsys) -> None:
        argv = [
            "search-depth2",
            "--layer1", "1,2",
            "--layer2", " ",
            "-n", "2",
            "-m", "2",
        ]
        code, _, err = run_cli(capsys, argv)
        assert code == 2
        assert "holds no supports" in err


class TestCliErrors:
    def test_missing_file_exits_2(self, capsys) -> None:
        code, _, err = run_cli(capsys, ["simulate", "no-such-file.json", "--input", "00"])
        assert code == 2
        assert "FileNotFoundError" in err

    def test_json_error_document_shape(self, capsys) -> None:
        code, report = run_json(
            capsys, ["simulate", "no-such-file.json", "--input", "00"]
        )
        assert code == 2
        assert list(report) == ["schema", "command", "error"]
        assert report["command"] == "simulate"

    def test_unparseable_circuit_file_exits_2(self, capsys, tmp_path) -> None:
        path = write(tmp_path, "bad.json", "{not json")
        code, _, err = run_cli(capsys, ["simulate", path, "--input", "00"])
        assert code == 2
        assert "JSONDecodeError" in err

    def test_validation_error_exits_2(self, capsys, tmp_path) -> None:
        text = json.dumps(
            {
                "qubits": 3,
                "inputs": 3,
                "layers": [{"kind": "multi", "csign": [[1, 2], [2, 3]]}],
            }
        )
        path = write(tmp_path, "overlap.json", text)
        code, _, err = run_cli(capsys, ["simulate", path, "--input", "000"])
        assert code == 2
        assert "CircuitValidationError" in err

    def test_bad_subset_exits_2(self, capsys, tmp_path) -> None:
        ghz = QuantumState.normalized(np.array([1, 0, 0, 1], dtype=complex))
        path = write(tmp_path, "bell.json", serialize_state(ghz))
        code, _, err = run_cli(capsys, ["separability", path, "--subset", "1,x"])
        assert code == 2
        assert "comma-separated integers" in err

    def test_unknown_flag_is_a_usage_error(self, capsys) -> None:
        with pytest.raises(SystemExit) as info:
            main(["--bogus"])
        assert info.value.code == 2

    def test_missing_subcommand_is_a_usage_error(self, capsys) -> None:
        with pytest.raises(SystemExit) as info:
            main([])
        assert info.value.code == 2
