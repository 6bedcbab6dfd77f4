import json
import textwrap

import numpy as np
import pytest

from specgap import load_state
from specgap.cli import main
from specgap.config import ConfigError, emit_config, parse_config

GAUSSIAN_MINI = textwrap.dedent(
    """
    [symbol]
    kind = catalog
    name = gaussian_power
    params = 2

    [weight]
    kind = catalog
    name = gaussian_power
    params = 2

    [problem]
    dimension = 1
    alphas = 0.2, 0.1, 0.05
    eigen_count = 1

    [grid]
    mode = manual
    n = 512
    half_length = 14
    """
)


def write(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestConfigRoundTrip:
    def test_emit_parse_is_idempotent(self):
        cfg = parse_config(GAUSSIAN_MINI)
        normalized = emit_config(cfg)
        again = emit_config(parse_config(normalized))
        assert normalized == again
        assert parse_config(normalized) == cfg

    def test_defaults_fill_missing_sections(self):
        cfg = parse_config("[problem]\ndimension = 1\n")
        assert cfg.symbol.kind == "catalog"
        assert cfg.rel_final == 0.05
        assert cfg.alphas == (0.2, 0.1, 0.05, 0.025)

    @pytest.mark.parametrize(
        "text",
        [
            "not an ini at all [",
            "[problem]\ndimension = 7\n",
            "[problem]\nalphas = 0.1, 0.2\n",  # increasing
            "[problem]\nalphas = -0.1\n",
            "[problem]\neigen_count = 0\n",
            "[grid]\nmode = manual\nn = 31\n",
            "[solver]\ntol = -1\n",
            "[symbol]\nkind = expression\nexpr = x1\n",  # missing principal/degree
            "[symbol]\nkind = nonsense\n",
            "[tolerances]\nrel_final = 2\n",
            "[localization]\nradii = 0\n",
            "[run]\nthreads = 0\n",
        ],
    )
    def test_rejects_bad_configs(self, text):
        with pytest.raises(ConfigError):
            parse_config(text)


class TestValidateCommand:
    def test_gaussian_passes(self, tmp_path, capsys):
        rc = main(["validate", "--config", write(tmp_path, GAUSSIAN_MINI)])
        out = capsys.readouterr().out
        assert rc == 0
        assert "pass" in out

    def test_shifted_maximum_fails_with_named_check(self, tmp_path, capsys):
        text = GAUSSIAN_MINI.replace(
            "[symbol]\nkind = catalog\nname = gaussian_power\nparams = 2",
            "[symbol]\nkind = expression\nexpr = exp(-(x1-1)^2)\n"
            "principal = x1^2\ndegree = 2",
        )
        rc = main(["validate", "--config", write(tmp_path, text)])
        out = capsys.readouterr().out
        assert rc == 1
        assert "maximum" in out

    def test_malformed_expression_exits_2(self, tmp_path, capsys):
        text = GAUSSIAN_MINI.replace(
            "[symbol]\nkind = catalog\nname = gaussian_power\nparams = 2",
            "[symbol]\nkind = expression\nexpr = sin(x1)\nprincipal = x1^2\ndegree = 2",
        )
        rc = main(["validate", "--config", write(tmp_path, text)])
        err = capsys.readouterr().err
        assert rc == 2
        assert "configuration error" in err

    def test_missing_config_exits_2(self, tmp_path):
        rc = main(["validate", "--config", str(tmp_path / "absent.ini")])
        assert rc == 2


class TestModelSpectrumCommand:
    def test_harmonic_csv(self, tmp_path, capsys):
        text = GAUSSIAN_MINI.replace("eigen_count = 1", "eigen_count = 4")
        rc = main(
            ["model-spectrum", "--config", write(tmp_path, text), "--out", str(tmp_path)]
        )
        assert rc == 0
        lines = (tmp_path / "model_spectrum.csv").read_text().splitlines()
        assert lines[0] == "# schema: specgap.model.v1"
        assert lines[1] == "n,mu,residual,N,L,mode"
        exact = np.sqrt(2.0) * (2 * np.arange(1, 5) - 1)
        for row, target in zip(lines[2:], exact):
            fields = row.split(",")
            assert abs(float(fields[1]) - target) <= 1e-8 * target
            assert fields[3] == "512"

    def test_zero_eigen_count_exits_2(self, tmp_path):
        text = GAUSSIAN_MINI.replace("eigen_count = 1", "eigen_count = 0")
        rc = main(
            ["model-spectrum", "--config", write(tmp_path, text), "--out", str(tmp_path)]
        )
        assert rc == 2


class TestSweepAndVerify:
    def test_sweep_writes_all_outputs(self, tmp_path, capsys):
        rc = main(["sweep", "--config", write(tmp_path, GAUSSIAN_MINI),
                   "--out", str(tmp_path / "out")])
        assert rc == 0
        records = (tmp_path / "out" / "records.csv").read_text().splitlines()
        assert records[0] == "# schema: specgap.records.v1"
        header = records[1].split(",")
        assert header[:7] == [
            "alpha", "n", "lambda", "scaled_gap", "residual", "k_form", "s_form",
        ]
        assert "pos_mass_out_R2" in header and "frq_mass_out_R8" in header
        assert len(records) == 2 + 3  # comment + header + one row per (alpha, n)
        payload = json.loads((tmp_path / "out" / "report.json").read_text())
        assert payload["schema"] == "specgap.report.v1"
        assert (tmp_path / "out" / "plot_gaps.py").exists()

    def test_final_row_scaled_gap_close_to_model_value(self, tmp_path):
        rc = main(["sweep", "--config", write(tmp_path, GAUSSIAN_MINI),
                   "--out", str(tmp_path / "out")])
        assert rc == 0
        rows = (tmp_path / "out" / "records.csv").read_text().splitlines()[2:]
        final_alpha, n = rows[-1].split(",")[:2]
        assert (float(final_alpha), int(n)) == (0.05, 1)
        gap = float(rows[-1].split(",")[3])
        assert abs(gap - np.sqrt(2.0)) <= 0.05 * np.sqrt(2.0)

    def test_verify_passes_mini_ladder(self, tmp_path):
        rc = main(["verify", "--config", write(tmp_path, GAUSSIAN_MINI),
                   "--out", str(tmp_path / "out")])
        assert rc == 0

    def test_verify_with_unreachable_tolerance_exits_1(self, tmp_path):
        text = GAUSSIAN_MINI + "\n[tolerances]\nrel_final = 1e-6\nrel_extrap = 1e-6\n"
        rc = main(["verify", "--config", write(tmp_path, text),
                   "--out", str(tmp_path / "out")])
        assert rc == 1

    def test_verify_needs_three_ladder_points(self, tmp_path):
        text = GAUSSIAN_MINI.replace("alphas = 0.2, 0.1, 0.05", "alphas = 0.2, 0.1")
        rc = main(["verify", "--config", write(tmp_path, text),
                   "--out", str(tmp_path / "out")])
        assert rc == 2

    def test_sweep_solver_failure_exits_3(self, tmp_path):
        text = GAUSSIAN_MINI + "\n[solver]\ntol = 1e-13\nmax_iterations = 3\nmodel_mode = dense\n"
        rc = main(["sweep", "--config", write(tmp_path, text),
                   "--out", str(tmp_path / "out")])
        assert rc == 3

    def test_eigenfunction_dumps_loadable(self, tmp_path):
        text = GAUSSIAN_MINI + "\n[output]\nemit_eigenfunctions = true\n"
        out = tmp_path / "out"
        rc = main(["sweep", "--config", write(tmp_path, text), "--out", str(out)])
        assert rc == 0
        dumps = sorted(out.glob("eigenfunction_*.sgv"))
        assert len(dumps) == 3
        vec = load_state(dumps[0])
        assert vec.grid.n_per_axis == 512

    def test_seed_override_recorded_and_echoed(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["sweep", "--config", write(tmp_path, GAUSSIAN_MINI),
                   "--out", str(out), "--seed", "123"])
        assert rc == 0
        payload = json.loads((out / "report.json").read_text())
        assert payload["provenance"]["rng_seed"] == 123
        assert "seed = 123" in payload["config"]["source"]

    def test_threads_env_honored_when_flag_absent(self, tmp_path, monkeypatch):
        out = tmp_path / "out"
        monkeypatch.setenv("SPECGAP_THREADS", "2")
        rc = main(["sweep", "--config", write(tmp_path, GAUSSIAN_MINI), "--out", str(out)])
        assert rc == 0
        payload = json.loads((out / "report.json").read_text())
        assert payload["provenance"]["threads"] == 2

    def test_threads_flag_beats_env(self, tmp_path, monkeypatch):
        out = tmp_path / "out"
        monkeypatch.setenv("SPECGAP_THREADS", "4")
        rc = main(["sweep", "--config", write(tmp_path, GAUSSIAN_MINI),
                   "--out", str(out), "--threads", "1"])
        assert rc == 0
        payload = json.loads((out / "report.json").read_text())
        assert payload["provenance"]["threads"] == 1

    def test_reports_reproduce_from_their_own_echo(self, tmp_path):
        # a report embeds the normalized config; re-running it reproduces
        # the eigenvalue records bit-for-bit
        out1 = tmp_path / "one"
        out2 = tmp_path / "two"
        assert main(["sweep", "--config", write(tmp_path, GAUSSIAN_MINI),
                     "--out", str(out1)]) == 0
        payload = json.loads((out1 / "report.json").read_text())
        echoed = payload["config"]["source"]
        assert main(["sweep", "--config", write(tmp_path, echoed, "echo.ini"),
                     "--out", str(out2)]) == 0
        second = json.loads((out2 / "report.json").read_text())
        assert [r["lambda"] for r in payload["records"]] == [
            r["lambda"] for r in second["records"]
        ]


class TestReportCommand:
    def test_renders_existing_report(self, tmp_path, capsys):
        out = tmp_path / "out"
        main(["sweep", "--config", write(tmp_path, GAUSSIAN_MINI), "--out", str(out)])
        capsys.readouterr()
        rc = main(["report", "--config", write(tmp_path, GAUSSIAN_MINI), "--out", str(out)])
        printed = capsys.readouterr().out
        assert rc == 0
        assert "model eigenvalues" in printed
        assert "verdicts" in printed

    def test_missing_report_exits_2(self, tmp_path):
        rc = main(["report", "--config", write(tmp_path, GAUSSIAN_MINI),
                   "--out", str(tmp_path / "void")])
        assert rc == 2
