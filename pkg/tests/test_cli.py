import argparse
import csv
import json

import numpy as np
import pytest

from spincm import load_state, random_state
from spincm.cli import main, parse_complex


@pytest.mark.parametrize(
    "text,value",
    [
        ("1.5", 1.5),
        ("-2", -2.0),
        ("1+2i", 1 + 2j),
        ("0.3-0.4i", 0.3 - 0.4j),
        ("1.0+0.5I", 1.0 + 0.5j),
    ],
)
def test_parse_complex(text, value):
    assert parse_complex(text) == value


def test_parse_complex_rejects_garbage():
    with pytest.raises(argparse.ArgumentTypeError):
        parse_complex("one+twoi")


def _gen(tmp_path, capsys, seed=3, particles=3, spin=2):
    path = tmp_path / "state.json"
    rc = main(
        [
            "gen",
            "--particles",
            str(particles),
            "--spin",
            str(spin),
            "--seed",
            str(seed),
            "--out",
            str(path),
        ]
    )
    assert rc == 0
    capsys.readouterr()
    return path


def test_gen_writes_state_and_prints_hamiltonians(tmp_path, capsys):
    path = tmp_path / "state.json"
    rc = main(["gen", "--particles", "3", "--spin", "2", "--seed", "7", "--out", str(path)])
    out = capsys.readouterr().out
    assert rc == 0
    assert "H1 =" in out and "H5 =" in out
    loaded, _ = load_state(path)
    ref = random_state(3, 2, seed=7)
    assert np.array_equal(loaded.x, ref.x)
    assert np.array_equal(loaded.a, ref.a)


def test_gen_rejects_zero_particles(tmp_path):
    with pytest.raises(SystemExit):
        main(["gen", "--particles", "0", "--spin", "1", "--out", str(tmp_path / "s.json")])


def test_evolve_t1_is_shift(tmp_path, capsys):
    state_path = _gen(tmp_path, capsys, seed=11)
    prefix = str(tmp_path / "traj")
    rc = main(["evolve", str(state_path), "--m", "1", "--T", "0.5", "--out", prefix])
    out = capsys.readouterr().out
    assert rc == 0
    assert "samples" in out
    data = json.loads((tmp_path / "traj.json").read_text())
    start, _ = load_state(state_path)
    final = np.array(data["samples"][-1]["state"]["x"])
    shifted = start.x - 0.5
    assert np.max(np.abs(final[:, 0] + 1j * final[:, 1] - shifted)) <= 1e-12
    with open(tmp_path / "traj.csv") as fh:
        header = next(csv.reader(fh))
    assert "drift" in header


def test_evolve_conservation_summary(tmp_path, capsys):
    state_path = _gen(tmp_path, capsys, seed=11)
    prefix = str(tmp_path / "t2")
    rc = main(
        [
            "evolve",
            str(state_path),
            "--m",
            "2",
            "--T",
            "0.2",
            "--dt",
            "1e-3",
            "--record-every",
            "50",
            "--out",
            prefix,
        ]
    )
    out = capsys.readouterr().out
    assert rc == 0
    dev = float(out.split("deviation over flow: ")[1].split()[0])
    assert dev <= 1e-8


def test_evolve_rejects_m_zero(tmp_path, capsys):
    state_path = _gen(tmp_path, capsys)
    with pytest.raises(SystemExit):
        main(["evolve", str(state_path), "--m", "0", "--T", "0.1", "--out", str(tmp_path / "x")])


def test_evolve_collision_exit_code(tmp_path, capsys):
    # head-on pair: the attractive t_2 flow drives the poles together
    state_path = tmp_path / "pair.json"
    from spincm import new_state

    new_state([-1.0, 1.0], [2.0, -2.0], [[1.0], [1.0]], [[1.0], [1.0]]).save(state_path)
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({"eps_coll": 0.5}))
    rc = main(
        [
            "evolve",
            str(state_path),
            "--m",
            "2",
            "--T",
            "2.0",
            "--config",
            str(config_path),
            "--out",
            str(tmp_path / "c"),
        ]
    )
    err = capsys.readouterr().err
    assert rc == 2
    assert "error" in err


def test_verify_exit_zero_and_report(tmp_path, capsys):
    report_path = tmp_path / "report.json"
    rc = main(["verify", "--seed", "42", "--out", str(report_path)])
    out = capsys.readouterr().out
    assert rc == 0
    assert "overall: pass" in out
    data = json.loads(report_path.read_text())
    assert data["all_passed"] is True


def test_verify_exit_one_on_failure(tmp_path, capsys):
    # corrupt the stored state so the normalization constraint is violated
    state_path = _gen(tmp_path, capsys, seed=4)
    raw = json.loads(state_path.read_text())
    raw["a"][0][0][0] *= 1.5
    raw["a"][0][1][0] *= 1.5
    bad_path = tmp_path / "bad.json"
    bad_path.write_text(json.dumps(raw))
    # loading validates eagerly, so the CLI reports the violation as an error
    rc = main(["verify", str(bad_path)])
    err = capsys.readouterr().err
    assert rc == 2
    assert "ConstraintViolated" in err


def test_ba_eval_writes_finite_values(tmp_path, capsys):
    state_path = _gen(tmp_path, capsys, seed=9)
    out_path = tmp_path / "ba.json"
    rc = main(
        [
            "ba-eval",
            str(state_path),
            "--z",
            "1.3+0.7i",
            "--x-min",
            "-6",
            "--x-max",
            "6",
            "--x-points",
            "11",
            "--x-imag",
            "1.5",
            "--out",
            str(out_path),
        ]
    )
    assert rc == 0
    capsys.readouterr()
    data = json.loads(out_path.read_text())
    assert len(data["grid"]) == 11
    assert np.all(np.isfinite(np.array(data["psi_tilde"], dtype=float)))


def test_ba_eval_z_on_spectrum_fails(tmp_path, capsys):
    state_path = _gen(tmp_path, capsys, seed=9)
    state, _ = load_state(state_path)
    from spincm import build_lax

    ev = np.linalg.eigvals(build_lax(state).L)[0]
    z_text = f"{ev.real}{'+' if ev.imag >= 0 else ''}{ev.imag}i"
    rc = main(
        [
            "ba-eval",
            str(state_path),
            f"--z={z_text}",
            "--x-min",
            "-5",
            "--x-max",
            "5",
            "--out",
            str(tmp_path / "ba.json"),
        ]
    )
    err = capsys.readouterr().err
    assert rc == 2
    assert "SpectralCollision" in err


def test_ba_eval_large_x_near_identity(tmp_path, capsys):
    state_path = _gen(tmp_path, capsys, seed=9)
    out_path = tmp_path / "far.json"
    rc = main(
        [
            "ba-eval",
            str(state_path),
            "--z",
            "2.0+1.0i",
            "--x-min",
            "1000",
            "--x-max",
            "2000",
            "--x-points",
            "3",
            "--out",
            str(out_path),
        ]
    )
    assert rc == 0
    capsys.readouterr()
    data = json.loads(out_path.read_text())
    psi = np.array(data["psi_tilde"], dtype=float)
    eye = np.zeros_like(psi[0])
    eye[0, 0, 0] = eye[1, 1, 0] = 1.0
    for point in psi:
        assert np.max(np.abs(point - eye)) <= 1e-2
