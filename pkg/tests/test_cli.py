import json
from fractions import Fraction as F

import numpy as np
import pytest

import convspec as cs
from convspec import formats
from convspec.cli import ConfigError, main, parse_config
from conftest import CANTOR3_CONFIG, PLANE_CONFIG, QUARTER_CONFIG, write_config


class TestParseConfig:
    def test_plane_config(self, tmp_path):
        path = write_config(tmp_path, PLANE_CONFIG)
        system, params = parse_config(path)
        assert len(system.menu) == 2
        assert system.cycle == ("p1", "p2")
        assert params == {}

    def test_finite_prefix_word(self, tmp_path):
        doc = json.loads(json.dumps(QUARTER_CONFIG))
        doc["word"] = {"prefix": ["jp", "jp"], "cycle": []}
        system, _ = parse_config(write_config(tmp_path, doc))
        assert system.max_depth == 2
        with pytest.raises(cs.core.DepthError):
            cs.build_mu_n(system, 3)

    def test_dimension_mismatch(self, tmp_path):
        doc = json.loads(json.dumps(QUARTER_CONFIG))
        doc["pairs"][0]["B"] = [[0, 0], [2, 0]]
        with pytest.raises(ConfigError, match=r"pairs\[0\].B"):
            parse_config(write_config(tmp_path, doc))

    def test_unknown_key_rejected(self, tmp_path):
        doc = json.loads(json.dumps(QUARTER_CONFIG))
        doc["extra"] = 1
        with pytest.raises(ConfigError, match="unknown keys"):
            parse_config(write_config(tmp_path, doc))

    def test_unknown_param_rejected(self, tmp_path):
        doc = json.loads(json.dumps(QUARTER_CONFIG))
        doc["params"] = {"mystery": 3}
        with pytest.raises(ConfigError, match="mystery"):
            parse_config(write_config(tmp_path, doc))

    def test_spectrum_size_mismatch(self, tmp_path):
        doc = json.loads(json.dumps(QUARTER_CONFIG))
        doc["pairs"][0]["L"] = [[0]]
        with pytest.raises(ConfigError, match="#L != #B"):
            parse_config(write_config(tmp_path, doc))

    def test_non_expanding_matrix(self, tmp_path):
        doc = json.loads(json.dumps(QUARTER_CONFIG))
        doc["pairs"][0]["R"] = [[1]]
        with pytest.raises(ConfigError, match="expanding"):
            parse_config(write_config(tmp_path, doc))

    def test_invalid_json_reports_line(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"dimension": 1,\n "pairs": }')
        with pytest.raises(ConfigError, match="line 2"):
            parse_config(str(path))

    def test_weights_parsed(self, tmp_path):
        doc = json.loads(json.dumps(QUARTER_CONFIG))
        doc["pairs"][0]["weights"] = ["1/3", "2/3"]
        system, _ = parse_config(write_config(tmp_path, doc))
        assert system.pair("jp").B.weights == (F(1, 3), F(2, 3))


class TestCommands:
    def test_check_pair_exit_codes(self, tmp_path, capsys):
        plane = write_config(tmp_path, PLANE_CONFIG, "plane.json")
        cantor = write_config(tmp_path, CANTOR3_CONFIG, "cantor3.json")
        assert main(["check-pair", plane, "--pair", "p1", "--exact"]) == 0
        assert main(["check-pair", plane, "--pair", "p2", "--exact"]) == 0
        assert main(["check-pair", cantor, "--pair", "c", "--exact"]) == 1
        out = capsys.readouterr().out
        assert "PASS" in out and "FAIL" in out

    def test_find_spectra_csv(self, tmp_path):
        quarter = write_config(tmp_path, QUARTER_CONFIG)
        out = tmp_path / "spectra.csv"
        assert main(["find-spectra", quarter, "--pair", "jp", "--max", "2",
                     "--out", str(out)]) == 0
        header, rows = formats.read_csv(out)
        assert header == ["index", "l1"]
        assert [r[1] for r in rows if r[0] == "0"] == ["0", "1"]

    def test_build_round_trip(self, tmp_path):
        plane = write_config(tmp_path, PLANE_CONFIG)
        out = tmp_path / "atoms.csv"
        assert main(["build", plane, "--depth", "3", "--out", str(out)]) == 0
        system, _ = parse_config(plane)
        expected = cs.build_mu_n(system, 3)
        assert formats.measure_from_csv(out) == expected

    def test_spectrum_canonical_table(self, tmp_path):
        quarter = write_config(tmp_path, QUARTER_CONFIG)
        out = tmp_path / "spec.csv"
        assert main(["spectrum", quarter, "--depth", "2", "--out", str(out)]) == 0
        header, rows = formats.read_csv(out)
        assert header == ["level", "l1", "k1"]
        assert [r[1] for r in rows] == ["0", "1", "4", "5"]

    def test_spectrum_corrected_table(self, tmp_path):
        quarter = write_config(tmp_path, QUARTER_CONFIG)
        out = tmp_path / "spec.csv"
        assert main(["spectrum", quarter, "--corrected", "--levels", "1,2",
                     "--gamma", "0.5", "--eps", "0.05", "--out", str(out)]) == 0
        header, rows = formats.read_csv(out)
        assert len(rows) == 2 + 4

    def test_certify_exit_codes(self, tmp_path, capsys):
        plane = write_config(tmp_path, PLANE_CONFIG, "plane.json")
        quarter = write_config(tmp_path, QUARTER_CONFIG, "jp.json")
        cantor = write_config(tmp_path, CANTOR3_CONFIG, "cantor3.json")
        appendix = tmp_path / "stages.csv"
        assert main(["certify", plane, "--strategy", "cube",
                     "--csv", str(appendix)]) == 0
        header, rows = formats.read_csv(appendix)
        assert header == ["stage", "grade", "role", "detail"]
        assert all(r[1] in ("PASS", "EVIDENCE") for r in rows)
        assert main(["certify", quarter, "--strategy", "dd"]) == 0
        assert main(["certify", quarter, "--strategy", "equipos", "--grid", "32"]) == 2
        assert main(["certify", cantor, "--strategy", "dd"]) == 1
        assert "FAIL" in capsys.readouterr().out

    def test_zeroscan_output(self, tmp_path):
        quarter = write_config(tmp_path, QUARTER_CONFIG)
        out = tmp_path / "scan.csv"
        assert main(["zeroscan", quarter, "--tail", "0", "--grid", "64",
                     "--lattice", "4", "--tol", "1e-6", "--out", str(out)]) == 0
        text = out.read_text()
        assert "# candidates=0" in text
        assert text.endswith("\n") and "\r" not in text

    def test_equipos_certificate(self, tmp_path, capsys):
        quarter = write_config(tmp_path, QUARTER_CONFIG)
        out = tmp_path / "cert.csv"
        code = main(["equipos", quarter, "--tails", "0,1", "--grid", "32",
                     "--box", "2", "--depth", "20", "--out", str(out)])
        assert code == 2
        header, rows = formats.read_csv(out)
        assert header == ["tail", "x1", "k1", "modulus"]
        assert len(rows) == 2 * 32

    def test_equipos_failure_exit(self, tmp_path):
        quarter = write_config(tmp_path, QUARTER_CONFIG)
        code = main(["equipos", quarter, "--tails", "0", "--grid", "16",
                     "--eps-min", "0.99"])
        assert code == 1

    def test_render_pgm(self, tmp_path):
        quarter = write_config(tmp_path, QUARTER_CONFIG)
        out = tmp_path / "jp.pgm"
        assert main(["render", quarter, "--quantity", "muhat2", "--box", "0,4",
                     "--res", "1024", "--depth", "30", "--out", str(out)]) == 0
        pix, maxval = formats.read_pgm(out)
        assert maxval == 65535 and pix.shape == (1, 1024)
        assert pix[0, 256] == 0           # pixel at xi = 1 (mask zero)
        assert pix[0, 0] == 65535         # xi = 0

    def test_render_q_quantity(self, tmp_path):
        quarter = write_config(tmp_path, QUARTER_CONFIG)
        out = tmp_path / "q.pgm"
        assert main(["render", quarter, "--quantity", "Q", "--box", "0,1",
                     "--res", "32", "--depth", "25", "--spectrum-depth", "3",
                     "--out", str(out)]) == 0
        pix, _ = formats.read_pgm(out)
        assert pix.min() > 0.8 * 65535

    def test_sample_csv(self, tmp_path):
        plane = write_config(tmp_path, PLANE_CONFIG)
        out = tmp_path / "pts.csv"
        assert main(["sample", plane, "--depth", "5", "--count", "50",
                     "--seed", "9", "--out", str(out)]) == 0
        header, rows = formats.read_csv(out)
        assert header == ["x1", "x2"] and len(rows) == 50

    def test_missing_pair_name(self, tmp_path, capsys):
        quarter = write_config(tmp_path, QUARTER_CONFIG)
        assert main(["check-pair", quarter, "--pair", "nope"]) == 1
        assert "no pair named" in capsys.readouterr().err


class TestDeterminism:
    def test_byte_identical_outputs_across_threads(self, tmp_path):
        quarter = write_config(tmp_path, QUARTER_CONFIG, "jp.json")
        plane = write_config(tmp_path, PLANE_CONFIG, "plane.json")
        jobs = [
            (["sample", plane, "--depth", "6", "--count", "200", "--seed", "4"], "s.csv"),
            (["render", quarter, "--quantity", "muhat2", "--box", "0,2",
              "--res", "128", "--depth", "20", "--binary"], "r.pgm"),
            (["zeroscan", quarter, "--grid", "32", "--lattice", "3"], "z.csv"),
            (["equipos", quarter, "--grid", "16", "--depth", "15"], "e.csv"),
        ]
        for argv, name in jobs:
            a, b = tmp_path / f"a_{name}", tmp_path / f"b_{name}"
            assert main(argv + ["--threads", "1", "--out", str(a)]) in (0, 2)
            assert main(argv + ["--threads", "8", "--out", str(b)]) in (0, 2)
            assert a.read_bytes() == b.read_bytes()

    def test_pgm_ascii_and_binary_agree(self, tmp_path):
        quarter = write_config(tmp_path, QUARTER_CONFIG)
        a, b = tmp_path / "a.pgm", tmp_path / "b.pgm"
        main(["render", quarter, "--quantity", "muhat2", "--box", "0,2",
              "--res", "64", "--depth", "15", "--out", str(a)])
        main(["render", quarter, "--quantity", "muhat2", "--box", "0,2",
              "--res", "64", "--depth", "15", "--binary", "--out", str(b)])
        pa, _ = formats.read_pgm(a)
        pb, _ = formats.read_pgm(b)
        assert np.array_equal(pa, pb)
