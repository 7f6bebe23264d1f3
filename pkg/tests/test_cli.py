import json

import pytest

from qcipher.cli import main
from qcipher.keyschedule import key_from_json
from qcipher.modes import transmission_from_json


@pytest.fixture
def keyfile(tmp_path):
    path = tmp_path / "key.json"
    assert main(["keygen", "--n", "8", "--N", "256", "--seed", "42", "--out", str(path)]) == 0
    return path


def test_keygen_writes_valid_key_and_reports_keyspace(tmp_path, capsys):
    path = tmp_path / "key.json"
    rc = main(["keygen", "--n", "8", "--N", "256", "--seed", "42", "--out", str(path), "--json"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["keyspace"] == str(2**64 * 576)
    assert abs(out["log2_keyspace"] - 73.1699) < 1e-3
    key = key_from_json(path.read_text())
    assert key.n == 8 and key.N == 256


def test_keygen_is_byte_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["keygen", "--n", "6", "--N", "64", "--seed", "7", "--out", str(a)])
    main(["keygen", "--n", "6", "--N", "64", "--seed", "7", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_keygen_rejects_small_n(tmp_path, capsys):
    rc = main(["keygen", "--n", "1", "--N", "4", "--out", str(tmp_path / "k.json")])
    assert rc == 1
    assert "n must be" in capsys.readouterr().err


def test_usage_error_exit_code(capsys):
    assert main(["keygen", "--n", "8"]) == 1
    assert main(["nonsense"]) == 1


def test_encrypt_block_count(keyfile, tmp_path, capsys):
    data = tmp_path / "msg.bin"
    data.write_bytes(b"\xa5\x3c")
    out = tmp_path / "t.json"
    rc = main(["encrypt", "--key", str(keyfile), "--mode", "m1", "--in", str(data),
               "--out", str(out), "--seed", "1", "--json"])
    assert rc == 0
    assert json.loads(capsys.readouterr().out)["blocks"] == 2
    t = transmission_from_json(out.read_text())
    assert t.m == 2 and t.n == 8


@pytest.mark.parametrize("mode", ["m1", "m2"])
def test_encrypt_decrypt_round_trip(keyfile, tmp_path, mode):
    data = tmp_path / "msg.bin"
    payload = b"\x00\xff\x5a" if mode == "m1" else b"\xff\x5a"
    data.write_bytes(payload)
    enc = tmp_path / "t.json"
    dec = tmp_path / "out.bin"
    assert main(["encrypt", "--key", str(keyfile), "--mode", mode, "--in", str(data),
                 "--out", str(enc), "--seed", "3"]) == 0
    assert main(["decrypt", "--key", str(keyfile), "--in", str(enc), "--out", str(dec)]) == 0
    assert dec.read_bytes() == payload


def test_encrypt_round_trip_with_iv(keyfile, tmp_path):
    data = tmp_path / "msg.bin"
    data.write_bytes(b"\x42")
    enc, dec = tmp_path / "t.json", tmp_path / "out.bin"
    iv = "10110001"
    assert main(["encrypt", "--key", str(keyfile), "--mode", "m2", "--in", str(data),
                 "--out", str(enc), "--iv", iv]) == 0
    assert main(["decrypt", "--key", str(keyfile), "--in", str(enc), "--out", str(dec),
                 "--iv", iv]) == 0
    assert dec.read_bytes() == b"\x42"


def test_encrypt_rejects_partial_block(tmp_path, capsys):
    key = tmp_path / "k.json"
    main(["keygen", "--n", "6", "--N", "64", "--seed", "1", "--out", str(key)])
    data = tmp_path / "msg.bin"
    data.write_bytes(b"\x01")  # 8 bits, not a multiple of 6
    rc = main(["encrypt", "--key", str(key), "--mode", "m1", "--in", str(data),
               "--out", str(tmp_path / "t.json")])
    assert rc == 1
    assert "pad" in capsys.readouterr().err


def test_encrypt_mode2_register_cap(keyfile, tmp_path, capsys):
    data = tmp_path / "msg.bin"
    data.write_bytes(b"\x11\x22\x33\x44")  # 4 blocks of 8 > 24 qubits
    rc = main(["encrypt", "--key", str(keyfile), "--mode", "m2", "--in", str(data),
               "--out", str(tmp_path / "t.json")])
    assert rc == 3
    assert "cap" in capsys.readouterr().err


def test_decrypt_tampered_payload_exits_2(keyfile, tmp_path, capsys):
    data = tmp_path / "msg.bin"
    data.write_bytes(b"\x99")
    enc = tmp_path / "t.json"
    main(["encrypt", "--key", str(keyfile), "--mode", "m1", "--in", str(data), "--out", str(enc)])
    obj = json.loads(enc.read_text())
    amps = obj["payload"][0]["amps"]
    amps[0], amps[1] = amps[1], amps[0]
    enc.write_text(json.dumps(obj))
    rc = main(["decrypt", "--key", str(keyfile), "--in", str(enc), "--out", str(tmp_path / "o.bin")])
    assert rc == 2
    assert "block 0" in capsys.readouterr().err


def test_decrypt_wrong_key_exits_2(keyfile, tmp_path):
    other = tmp_path / "other.json"
    main(["keygen", "--n", "8", "--N", "256", "--seed", "1234", "--out", str(other)])
    data = tmp_path / "msg.bin"
    data.write_bytes(b"\x7e")
    enc = tmp_path / "t.json"
    main(["encrypt", "--key", str(keyfile), "--mode", "m1", "--in", str(data), "--out", str(enc)])
    assert main(["decrypt", "--key", str(other), "--in", str(enc), "--out", str(tmp_path / "o.bin")]) == 2


def test_decrypt_truncated_file_exits_1(keyfile, tmp_path):
    enc = tmp_path / "t.json"
    enc.write_text('{"mode": "m1", "n": 8,')
    assert main(["decrypt", "--key", str(keyfile), "--in", str(enc), "--out", str(tmp_path / "o.bin")]) == 1


def test_analyze_confusion_passes(keyfile, tmp_path):
    report = tmp_path / "r.json"
    rc = main(["analyze", "--key", str(keyfile), "--kind", "confusion", "--out", str(report)])
    assert rc == 0
    obj = json.loads(report.read_text())
    assert obj["pass"] is True
    assert obj["epsilon"] == 1e-6 and obj["grid"] == 8


def test_analyze_step1_ablation_fails(keyfile, tmp_path):
    report = tmp_path / "r.json"
    rc = main(["analyze", "--key", str(keyfile), "--kind", "diffusion", "--ablate", "step1",
               "--out", str(report)])
    assert rc == 1
    obj = json.loads(report.read_text())
    assert obj["pass"] is False
    assert obj["col_counts"] == [1] * 8


def test_analyze_rules_report(keyfile, tmp_path):
    report = tmp_path / "r.json"
    rc = main(["analyze", "--key", str(keyfile), "--kind", "rules", "--trials", "20",
               "--seed", "5", "--out", str(report)])
    assert rc == 0
    obj = json.loads(report.read_text())
    assert obj["n"] == 6  # clamped to the supported range
    assert obj["transfer_violations"] == []
    assert obj["pass"] is True


def test_attack_bounds(tmp_path, capsys):
    rc = main(["attack", "--kind", "bounds", "--n", "5", "--L", "10", "--json"])
    assert rc == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["lower"] == "5242880"
    assert obj["upper"] == "10240000000000"


def test_attack_intercept_detects(tmp_path, capsys):
    rc = main(["attack", "--kind", "intercept", "--r", "5", "--trials", "400", "--seed", "2"])
    assert rc == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["estimates"]["detection_rate"] > 0.99


def test_attack_brute_enumerates_keyspace(capsys):
    rc = main(["attack", "--kind", "brute", "--n", "2", "--N", "2", "--seed", "3"])
    assert rc == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["params"]["enumerated"] == 4
    assert obj["counts"]["true_key_found"] == 1


def test_attack_brute_resource_cap(capsys):
    assert main(["attack", "--kind", "brute", "--n", "8", "--N", "256"]) == 3


def test_attack_stats_step1(keyfile, tmp_path, capsys):
    rc = main(["attack", "--kind", "stats", "--key", str(keyfile), "--samples", "20000",
               "--seed", "4"])
    assert rc == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["counts"]["recovered_qubits"] >= 7
    assert obj["params"]["full_circuit"] is False


def test_attack_stats_full_circuit_fails(keyfile, capsys):
    rc = main(["attack", "--kind", "stats", "--key", str(keyfile), "--samples", "20000",
               "--seed", "4", "--full-circuit"])
    assert rc == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["counts"]["recovered_qubits"] <= 2


def test_keyspace_command(capsys):
    assert main(["keyspace", "--n", "4", "--N", "16", "--json"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["keyspace"] == "262144"
    assert main(["keyspace", "--n", "8", "--N", "256"]) == 0
    assert "73.17" in capsys.readouterr().out
