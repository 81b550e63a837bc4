"""
Tests for the thetaspec command line
"""
import csv
import json
import math

import pytest

from app import main as cli
from app.services.analytic import CHI4, ZETA, completed
from app.core.exceptions import InvariantViolationError
from app.schemas.run import Command, RunConfig
from app.services.symbolic.liealg import REFERENCE_GL4_SCALAR


class TestParsing:
    """Test argument handling and exit codes"""

    def test_unknown_flag(self, tmp_path):
        out = tmp_path / "report.csv"
        assert cli.main(["casimir", "--bogus", "-o", str(out)]) == 1
        assert not out.exists()

    def test_height_must_exceed_one(self, tmp_path):
        assert cli.main(["scattering-zeros", "--a", "1.0", "-o", str(tmp_path / "z.csv")]) == 1

    def test_t_max_limit(self, tmp_path):
        assert cli.main(["count", "--t-max", "400", "-o", str(tmp_path / "c.csv")]) == 1

    def test_ms_norm_alias(self):
        config = cli.parse_args(["ms", "norm", "--a", "3", "--point", "9.5"])
        assert config.command is Command.ms_norm
        assert config.points == [complex(9.5, 0.0)]

    def test_intertwine_defaults_to_rankin_selberg(self):
        assert cli.parse_args(["intertwine"]).preset == "rankin-selberg"
        assert cli.parse_args(["casimir"]).preset == "interleaved"

    def test_bad_word(self, tmp_path):
        assert cli.main(["intertwine", "--word", "2,x", "-o", str(tmp_path / "w.csv")]) == 1

    def test_invariant_violation_exit_code(self, monkeypatch):
        def broken(config):
            raise InvariantViolationError("forced")

        monkeypatch.setitem(cli.HANDLERS, Command.casimir, broken)
        assert cli.run(RunConfig(command=Command.casimir)) == 2


class TestCommands:
    """Test report contents"""

    def test_casimir_json(self, tmp_path):
        out = tmp_path / "casimir.json"
        assert cli.main(["casimir", "--format", "json", "-o", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert payload["reference"] == REFERENCE_GL4_SCALAR
        assert payload["matches_reference"] is True

    def test_intertwine_specialization(self, tmp_path):
        out = tmp_path / "intertwine.json"
        assert cli.main(["intertwine", "--format", "json", "-o", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert payload["specialization"]["verdict"] == "pass"
        assert payload["final"] == ["s3 + 2", "s4 + 2", "s1 - 2", "s2 - 2"]

    def test_csv_timestamp_line(self, tmp_path):
        out = tmp_path / "casimir.csv"
        assert cli.main(["casimir", "--n", "2", "--format", "csv", "-o", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("# generated ")
        assert lines[1] == "key,value"

    def test_deterministic_without_timestamp(self, tmp_path):
        """Two identical runs produce identical bytes"""
        first, second = tmp_path / "first.csv", tmp_path / "second.csv"
        for out in (first, second):
            argv = ["scattering-zeros", "--a", "3", "--t-max", "20", "--no-cache", "--no-timestamp", "-o", str(out)]
            assert cli.main(argv) == 0
        assert first.read_bytes() == second.read_bytes()
        assert first.read_text().splitlines()[0] == "j,t_j,branch,residual"

    def test_cached_scan_is_identical(self, tmp_path, cache_dir):
        """A second run reads the cached zeros and writes the same report"""
        first, second = tmp_path / "first.csv", tmp_path / "second.csv"
        for out in (first, second):
            assert cli.main(["scattering-zeros", "--t-max", "25", "--no-timestamp", "-o", str(out)]) == 0
        assert len(list(cache_dir.glob("zeros_*.csv"))) == 1
        assert first.read_bytes() == second.read_bytes()

    def test_ms_norm_points(self, tmp_path):
        out = tmp_path / "ms.csv"
        assert cli.main(["ms", "norm", "--a", "3", "--point", "9.5", "--format", "csv", "--no-timestamp",
                         "-o", str(out)]) == 0
        rows = list(csv.reader(out.open()))
        assert rows[0] == ["t", "closed_form", "extrapolated", "residual", "fd_error"]
        assert float(rows[1][3]) < 1e-6

    def test_metrics_file(self, tmp_path):
        metrics = tmp_path / "metrics.prom"
        argv = ["scattering-zeros", "--t-max", "15", "--no-cache", "-o", str(tmp_path / "z.csv"),
                "--metrics-out", str(metrics)]
        assert cli.main(argv) == 0
        assert "thetaspec_zeros_found_total" in metrics.read_text()

    @pytest.mark.slow
    def test_spectrum_solve_csv(self, tmp_path):
        out = tmp_path / "spectrum.csv"
        argv = ["spectrum-solve", "--a", "3", "--t-max", "40", "--no-cache", "--no-timestamp", "-o", str(out)]
        assert cli.main(argv) == 0
        rows = list(csv.reader(out.open()))
        assert rows[0] == ["j", "t_j", "weight", "norm_sq", "tau_j", "residual", "deriv_cert"]
        body = rows[1:]
        assert all(float(r[2]) > 0 for r in body)
        assert all(float(r[1]) < float(r[4]) for r in body[:-1])
        assert body[-1][4] == ""


class TestDocumentedCommandLines:
    """Test the command lines quoted in the usage notes, printed to stdout"""

    def test_casimir_preset_alias(self, capsys):
        assert cli.main(["casimir", "--n", "4", "--preset", "section5"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["preset"] == "interleaved"
        assert payload["reference"] == REFERENCE_GL4_SCALAR
        assert payload["matches_reference"] is True

    def test_ms_norm_at_one_height(self, capsys):
        assert cli.main(["ms", "norm", "--a", "3", "--t", "12.5"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["t"] == pytest.approx(12.5)
        assert payload["residual"] < 1e-6
        assert payload["extrapolated"] == pytest.approx(payload["closed_form"], rel=1e-6)

    def test_intertwine_prints_json(self, capsys):
        assert cli.main(["intertwine"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["specialization"]["preset"] == "rankin-selberg"

    def test_rankin_selberg_alias(self):
        assert cli.parse_args(["intertwine", "--preset", "section2"]).preset == "rankin-selberg"

    def test_other_commands_stay_csv(self):
        assert cli.parse_args(["count"]).format.value == "csv"
        assert cli.parse_args(["casimir", "--format", "csv"]).format.value == "csv"

    def test_height_and_point_merge(self):
        config = cli.parse_args(["ms", "norm", "--t", "12.5", "--point", "9.5"])
        assert config.points == [complex(9.5, 0.0), complex(12.5, 0.0)]

    def test_unknown_preset(self):
        assert cli.main(["casimir", "--preset", "nonsense"]) == 1


class TestStrictThresholds:
    """Test that --strict surfaces the gap and tail thresholds as exit code 2"""

    def test_gaps_report_is_not_rigid(self, tmp_path, cache_dir):
        out = tmp_path / "gaps.json"
        argv = ["gaps", "--a", "3", "--t-max", "100", "--window-start", "50", "--format", "json", "-o", str(out)]
        assert cli.main(argv) == 0
        stats = json.loads(out.read_text())["stats"]
        assert stats["rigidity"]["rigid"] is False
        assert stats["local"]["cv"] > 0.1

    def test_strict_gaps_exit_code(self, tmp_path, cache_dir):
        out = tmp_path / "gaps.csv"
        argv = ["gaps", "--a", "3", "--t-max", "100", "--window-start", "50", "--strict", "-o", str(out)]
        assert cli.main(argv) == 2
        assert not out.exists()


class TestLFunctionFiles:
    """Test specfun on builtin and file-defined L-functions"""

    @pytest.fixture
    def zeta_file(self, tmp_path):
        path = tmp_path / "zeta.txt"
        lines = ["# name: file-zeta", "# degree: 1", "# gamma: 1/2,0,0",
                 f"# conductor: {math.pi ** -0.5!r}", "# poles: 1,0"]
        lines += [f"{n},1" for n in range(1, 2001)]
        path.write_text("\n".join(lines) + "\n")
        return path

    def test_completed_from_file(self, tmp_path, zeta_file):
        out = tmp_path / "completed.json"
        argv = ["specfun", "--function", "completed", "--lfunction", str(zeta_file), "--point", "3",
                "--format", "json", "-o", str(out)]
        assert cli.main(argv) == 0
        payload = json.loads(out.read_text())
        assert payload["lfunction"] == "file-zeta"
        value = payload["values"][0]["value"]
        assert value["re"] == pytest.approx(completed(ZETA, 3.0).real, rel=1e-6)
        assert value["im"] == pytest.approx(0.0, abs=1e-12)

    def test_hardy_z_of_builtin(self, tmp_path):
        out = tmp_path / "hardy.json"
        argv = ["specfun", "--function", "hardy-z", "--lfunction", "chi4", "--point", "6.020948904697597",
                "--format", "json", "-o", str(out)]
        assert cli.main(argv) == 0
        assert abs(json.loads(out.read_text())["values"][0]["value"]["re"]) < 1e-6

    def test_extended_completed_matches_double(self, tmp_path):
        out = tmp_path / "completed.json"
        argv = ["specfun", "--function", "completed", "--lfunction", "chi4", "--point", "2+1i",
                "--precision", "extended", "--format", "json", "-o", str(out)]
        assert cli.main(argv) == 0
        value = json.loads(out.read_text())["values"][0]["value"]
        expected = complex(completed(CHI4, 2 + 1j))
        assert complex(value["re"], value["im"]) == pytest.approx(expected, rel=1e-9)

    def test_extended_needs_builtin(self, tmp_path, zeta_file):
        argv = ["specfun", "--function", "completed", "--lfunction", str(zeta_file), "--point", "3",
                "--precision", "extended", "-o", str(tmp_path / "x.csv")]
        assert cli.main(argv) == 1

    def test_missing_file(self, tmp_path):
        argv = ["specfun", "--function", "completed", "--lfunction", str(tmp_path / "absent.txt"),
                "-o", str(tmp_path / "x.csv")]
        assert cli.main(argv) == 1
