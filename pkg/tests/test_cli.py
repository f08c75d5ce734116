import json

import pytest

from rational_spde.cli import build_parser, main, parse_config
from rational_spde.errors import ValidationError
from rational_spde.persistence.serializer import dump_observations, load_mesh
from rational_spde.view.renderer import CONFIG_PREFIX, OutputFormat


class TestParseConfig:
    def test_coeffs_defaults(self):
        config, level = parse_config(["coeffs"])
        assert config.beta == 0.75 and config.m_list == (1, 2, 3)
        assert level == 30

    def test_verbosity(self):
        assert parse_config(["coeffs", "-vv"])[1] == 10
        assert parse_config(["coeffs", "-q"])[1] == 40

    def test_fit_defaults_to_json(self, tmp_path):
        data = tmp_path / "obs.csv"
        data.write_text("x,y,replicate,value\n")
        config, _ = parse_config(["fit", "--data", str(data), "--fix", "nu"])
        assert config.fmt is OutputFormat.JSON
        assert config.fixed == ("nu",)

    def test_stochastic_command_needs_seed(self):
        with pytest.raises(ValidationError):
            parse_config(["sample"])

    def test_exclusive_flags(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["sample", "--nu", "1", "--beta", "1"])


class TestMain:
    def test_coeffs_csv(self, tmp_path):
        out = tmp_path / "coeffs.csv"
        assert main(["coeffs", "--m", "1", "2", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith(CONFIG_PREFIX)
        assert json.loads(lines[0][len(CONFIG_PREFIX):])["m_list"] == [1, 2]
        assert lines[1] == "m,b0,c0,b1,c1,b2,c2,b3"
        assert len(lines) == 4

    def test_sample_with_dumps(self, tmp_path):
        out, mesh, model = tmp_path / "s.json", tmp_path / "mesh.txt", tmp_path / "model.json"
        argv = [
            "sample", "--seed", "1", "--cells", "4", "--n", "2", "--format", "json",
            "--out", str(out), "--dump-mesh", str(mesh), "--dump-model", str(model),
        ]
        assert main(argv) == 0
        assert len(json.loads(out.read_text())["result"]) == 2
        assert load_mesh(mesh).n_nodes == 25
        assert json.loads(model.read_text())["mesh"] == str(mesh)
        assert (tmp_path / "Q.mtx").is_file()

    def test_convergence_csv(self, tmp_path):
        out = tmp_path / "rate.csv"
        argv = [
            "convergence", "--seed", "2", "--cells", "2", "--levels", "2", "--m", "1",
            "--samples", "3", "--out", str(out),
        ]
        assert main(argv) == 0
        lines = out.read_text().splitlines()
        assert lines[1] == "cells,h,error,slope,strong_error,strong_slope,m,suggested_m"
        assert len(lines) == 4

    def test_sample_is_reproducible(self, tmp_path):
        outputs = []
        for name in ("a.csv", "b.csv"):
            main(["sample", "--seed", "5", "--cells", "3", "--out", str(tmp_path / name)])
            outputs.append((tmp_path / name).read_text())
        assert outputs[0] == outputs[1]

    def test_loglik_and_fit(self, tmp_path, small_mesh, observations):
        data, mesh = tmp_path / "obs.csv", tmp_path / "mesh.txt"
        dump_observations(observations, data)
        assert main(["dump-mesh", "--cells", "8", "--out", str(mesh)]) == 0
        common = ["--data", str(data), "--mesh", str(mesh), "--kappa", "6"]
        out = tmp_path / "loglik.json"
        assert main(["loglik", *common, "--sigma2", "0.1", "--out", str(out)]) == 0
        assert "loglik" in json.loads(out.read_text())["result"]
        out = tmp_path / "fit.json"
        argv = ["fit", *common, "--fix", "nu", "phi2", "sigma2", "kappa", "--out", str(out)]
        assert main(argv) == 0
        assert json.loads(out.read_text())["result"]["kappa"] == 6.0

    def test_dump_mesh_to_stdout(self, capsys):
        assert main(["dump-mesh", "--cells", "2"]) == 0
        assert capsys.readouterr().out.startswith("nodes 9 triangles 8\n")

    @pytest.mark.parametrize(
        "argv",
        [
            ["convergence"],
            ["coeffs", "--m", "0"],
            ["loglik", "--data", "missing.csv", "--sigma2", "0.1"],
            ["sample", "--seed", "1", "--kappa", "-2"],
        ],
    )
    def test_invalid_input_exits_with_2(self, argv):
        assert main(argv) == 2

    def test_loglik_without_nugget(self, tmp_path, observations):
        data = tmp_path / "obs.csv"
        dump_observations(observations, data)
        assert main(["loglik", "--data", str(data)]) == 2

    def test_unwritable_output(self, tmp_path):
        assert main(["coeffs", "--out", str(tmp_path / "no" / "such" / "dir.csv")]) == 2
