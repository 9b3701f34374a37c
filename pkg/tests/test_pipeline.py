import csv
import io

import numpy as np
import pytest

from pcrkit import cli
from pcrkit.errors import ConfigError, StageError, TableFormatError
from pcrkit.fixtures import INDICATOR_NAMES
from pcrkit.pca import tucker_congruence
from pcrkit.pipeline import (
    Report,
    RunConfig,
    emit_report,
    load_table,
    render_report_delim,
    render_report_text,
    run_pipeline,
    write_table,
)
from pcrkit.preprocess import TimeSeriesTable


def planted_panel_table(seed=0, n_years=21, noise_sd=0.1, duplicate=None):
    """Planted 2-factor increments cumulated into levels.

    Demand block (REI, GVA, PD, GDHI) rides the first factor, supply
    block (PDS, PDC, IR, CPI) the second; the response increment mixes
    both.  ``duplicate`` clones an existing column under a new name.
    """
    rng = np.random.default_rng(seed)
    n_inc = n_years - 1
    factors = rng.standard_normal((n_inc, 2))
    predictors = [n for n in INDICATOR_NAMES if n != "IY"]
    blocks = {"REI": 0, "GVA": 0, "PD": 0, "GDHI": 0, "PDS": 1, "PDC": 1, "IR": 1, "CPI": 1}
    increments = {
        name: factors[:, blocks[name]] + noise_sd * rng.standard_normal(n_inc)
        for name in predictors
    }
    increments["IY"] = (
        2.0 * factors[:, 0] + 0.5 * factors[:, 1] + noise_sd * rng.standard_normal(n_inc)
    )
    names = list(INDICATOR_NAMES)
    if duplicate is not None:
        clone = duplicate + "2"
        increments[clone] = increments[duplicate].copy()
        names.append(clone)
    levels = np.empty((n_years, len(names)))
    base = rng.uniform(50.0, 150.0, size=len(names))
    levels[0] = base
    for i in range(n_inc):
        levels[i + 1] = levels[i] + np.column_stack(
            [increments[n] for n in names]
        )[i]
    return TimeSeriesTable(
        years=np.arange(2000, 2000 + n_years),
        names=tuple(names),
        values=levels,
        response="IY",
    )


class TestLoadTable:
    def test_roundtrip_full_precision(self, tmp_path):
        table = planted_panel_table(1)
        path = write_table(table, tmp_path / "t.csv")
        again = load_table(path)
        assert again.names == table.names
        assert np.array_equal(again.years, table.years)
        assert np.array_equal(again.values, table.values)

    def test_missing_file(self, tmp_path):
        with pytest.raises(TableFormatError, match="cannot read"):
            load_table(tmp_path / "absent.csv")

    def test_header_must_start_with_year(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("date,IY\n2000,1\n2001,2\n")
        with pytest.raises(TableFormatError, match="year"):
            load_table(p)

    def test_ragged_row_reports_line(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("year,IY,GVA\n2000,1,2\n2001,3\n")
        with pytest.raises(TableFormatError, match="line 3"):
            load_table(p)

    def test_non_numeric_cell_reports_column(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("year,IY,GVA\n2000,1,2\n2001,x,4\n")
        with pytest.raises(TableFormatError, match="IY"):
            load_table(p)

    def test_non_integer_year_rejected(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("year,IY\n2000.5,1\n")
        with pytest.raises(TableFormatError, match="integer"):
            load_table(p)

    def test_empty_file(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("")
        with pytest.raises(TableFormatError, match="empty"):
            load_table(p)

    def test_header_only(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("year,IY\n")
        with pytest.raises(TableFormatError, match="no data rows"):
            load_table(p)

    def test_gap_years_rejected(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("year,IY\n2000,1\n2002,2\n2003,3\n")
        with pytest.raises(Exception, match="consecutive"):
            load_table(p)

    def test_trailing_blank_lines_tolerated(self, tmp_path):
        p = tmp_path / "ok.csv"
        p.write_text("year,IY\n2000,1\n2001,2\n2002,4\n\n")
        assert load_table(p).n_years == 3


class TestRunConfig:
    def test_requires_exactly_one_source(self):
        with pytest.raises(ConfigError):
            RunConfig().validate()
        with pytest.raises(ConfigError):
            RunConfig(input_path="x", fixture="fig3").validate()

    def test_rejects_unknown_modes(self):
        with pytest.raises(ConfigError):
            RunConfig(fixture="fig3", diff="log").validate()
        with pytest.raises(ConfigError):
            RunConfig(fixture="fig3", rotation="promax").validate()
        with pytest.raises(ConfigError):
            RunConfig(fixture="fig3", scores="bartlett").validate()
        with pytest.raises(ConfigError):
            RunConfig(fixture="fig3", components=0).validate()
        with pytest.raises(ConfigError):
            RunConfig(fixture="fig3", format="json").validate()


class TestMatrixMode:
    def test_fixture_run_products(self):
        report = run_pipeline(RunConfig(fixture="fig3"))
        assert report.mode == "matrix"
        assert report.names == INDICATOR_NAMES
        assert report.predictor_names == tuple(
            n for n in INDICATOR_NAMES if n != "IY"
        )
        assert report.fixture_adjustment is not None
        assert report.correlation is not None
        assert report.solution is not None
        assert report.solution.n_components == 2
        assert report.weights is not None
        # No observations: these stay empty.
        assert report.vif is None
        assert report.scores is None
        assert report.pcr is None
        assert report.prices is None
        assert report.scatter == ()
        assert report.failure is None

    def test_rotation_none(self):
        report = run_pipeline(RunConfig(fixture="fig3", rotation="none"))
        assert report.solution.rotated_loadings is None
        assert report.weights.component_names == ("PC1", "PC2")

    def test_unknown_response_fails_input_stage(self):
        with pytest.raises(StageError) as excinfo:
            run_pipeline(RunConfig(fixture="fig3", response="nope"))
        assert excinfo.value.stage == "input"
        assert excinfo.value.exit_code == 2


class TestTableMode:
    def test_full_run_products(self, tmp_path):
        table = planted_panel_table(2)
        path = write_table(table, tmp_path / "t.csv")
        report = run_pipeline(RunConfig(input_path=path))
        assert report.mode == "table"
        assert report.solution.n_components == 2
        assert report.vif is not None and len(report.vif) == 8
        assert report.baseline is not None and report.baseline_error is None
        assert report.scores.shape == (20, 2)
        assert report.pcr is not None
        assert len(report.scatter) == 36
        assert report.prices is not None
        assert report.prices.base == float(table.column("IY")[0])
        assert np.all(np.isfinite(report.prices.levels))
        assert report.years is not None and report.years[0] == 2001

    def test_price_path_replays_fitted_increments(self, tmp_path):
        table = planted_panel_table(3)
        path = write_table(table, tmp_path / "t.csv")
        report = run_pipeline(RunConfig(input_path=path))
        rebuilt = report.prices.base + np.cumsum(report.pcr.fitted)
        assert np.abs(rebuilt - report.prices.levels).max() <= 1e-9

    def test_planted_structure_recovered_through_pipeline(self, tmp_path):
        table = planted_panel_table(4)
        path = write_table(table, tmp_path / "t.csv")
        report = run_pipeline(RunConfig(input_path=path))
        loadings = report.solution.rotated_loadings
        names = report.solution.names
        demand = np.array([1.0 if n in ("REI", "GVA", "PD", "GDHI") else 0.0 for n in names])
        supply = 1.0 - demand
        c = np.zeros((2, 2))
        for i in range(2):
            c[i, 0] = tucker_congruence(loadings[:, i], demand)
            c[i, 1] = tucker_congruence(loadings[:, i], supply)
        assert max(c[0, 0] + c[1, 1], c[0, 1] + c[1, 0]) / 2.0 > 0.95

    def test_percent_mode_skips_price_path(self, tmp_path):
        table = planted_panel_table(5)
        path = write_table(table, tmp_path / "t.csv")
        report = run_pipeline(RunConfig(input_path=path, diff="percent"))
        assert report.prices is None
        assert "not additive" in report.price_note

    def test_off_mode_uses_rows_as_increments(self, tmp_path):
        table = planted_panel_table(6)
        path = write_table(table, tmp_path / "t.csv")
        report = run_pipeline(RunConfig(input_path=path, diff="off"))
        assert report.years is not None and len(report.years) == 21
        assert report.prices is None

    def test_duplicate_predictor_baseline_fails_pcr_completes(self, tmp_path):
        table = planted_panel_table(7, duplicate="GVA")
        path = write_table(table, tmp_path / "t.csv")
        report = run_pipeline(
            RunConfig(input_path=path, components=2, ridge=True)
        )
        assert report.baseline is None
        assert "rank deficient" in report.baseline_error
        assert "GVA" in report.baseline_error
        assert report.pcr is not None
        assert np.all(np.isfinite(report.pcr.coefficients))

    def test_duplicate_predictor_without_ridge_fails_pca_stage(self, tmp_path):
        table = planted_panel_table(8, duplicate="GVA")
        path = write_table(table, tmp_path / "t.csv")
        with pytest.raises(StageError) as excinfo:
            run_pipeline(RunConfig(input_path=path, components=2))
        assert excinfo.value.stage == "pca"
        assert excinfo.value.exit_code == 4
        assert "ridge" in str(excinfo.value)


class TestStageErrors:
    def test_input_stage(self, tmp_path):
        with pytest.raises(StageError) as excinfo:
            run_pipeline(RunConfig(input_path=tmp_path / "absent.csv"))
        err = excinfo.value
        assert err.stage == "input"
        assert err.exit_code == 2
        assert err.report.failure[0] == "input"

    def test_preprocess_stage(self, tmp_path):
        p = tmp_path / "two.csv"
        p.write_text("year,IY,GVA\n2000,1,2\n2001,2,3\n")
        with pytest.raises(StageError) as excinfo:
            run_pipeline(RunConfig(input_path=p))
        assert excinfo.value.stage == "preprocess"
        assert excinfo.value.exit_code == 3
        # Partial products survive on the attached report.
        assert excinfo.value.report.names == ("IY", "GVA")

    def test_pca_stage(self, tmp_path):
        table = planted_panel_table(9)
        path = write_table(table, tmp_path / "t.csv")
        with pytest.raises(StageError) as excinfo:
            run_pipeline(RunConfig(input_path=path, components=20))
        assert excinfo.value.stage == "pca"
        assert excinfo.value.exit_code == 4
        assert excinfo.value.report.correlation is not None

    def test_regression_stage(self, tmp_path):
        # Three increments support correlation and extraction but leave
        # the two-component PCR without a residual degree of freedom.
        p = tmp_path / "tiny.csv"
        p.write_text(
            "year,IY,A,B\n2000,1,5,3\n2001,4,9,2\n2002,2,4,7\n2003,5,8,1\n"
        )
        with pytest.raises(StageError) as excinfo:
            run_pipeline(RunConfig(input_path=p, components=2))
        assert excinfo.value.stage == "regression"
        assert excinfo.value.exit_code == 5
        assert excinfo.value.report.solution is not None
        assert excinfo.value.report.baseline_error is not None

    def test_output_stage(self, tmp_path):
        blocker = tmp_path / "blocker"
        blocker.write_text("file, not a directory")
        report = run_pipeline(RunConfig(fixture="fig3"))
        with pytest.raises(Exception, match="cannot write"):
            emit_report(report, blocker / "sub")


class TestRendering:
    def test_text_sections_fixture(self):
        report = run_pipeline(RunConfig(fixture="fig3"))
        text = render_report_text(report)
        for section in (
            "[run]",
            "[variables]",
            "[fixture adjustment]",
            "[correlation]",
            "[eigenvalues]",
            "[retention]",
            "[proportion of variance]",
            "[rotated proportion of variance]",
            "[loadings]",
            "[rotated loadings]",
            "[communality]",
            "[score weights]",
        ):
            assert section in text
        assert "[vif]" not in text
        assert "[pcr]" not in text
        assert "[price path]" not in text

    def test_text_sections_table(self, tmp_path):
        table = planted_panel_table(11)
        path = write_table(table, tmp_path / "t.csv")
        report = run_pipeline(RunConfig(input_path=path))
        text = render_report_text(report)
        for section in ("[vif]", "[baseline ols]", "[component scores]", "[pcr]", "[price path]"):
            assert section in text

    def test_delim_parses_as_csv(self):
        report = run_pipeline(RunConfig(fixture="fig3"))
        rows = list(csv.reader(io.StringIO(render_report_delim(report))))
        assert rows[0] == ["section", "key", "field", "value"]
        sections = {row[0] for row in rows[1:]}
        assert {"run", "correlation", "eigenvalues", "score_weights"} <= sections
        corr_rows = [r for r in rows if r[0] == "correlation"]
        assert len(corr_rows) == 81

    def test_failure_section_rendered(self, tmp_path):
        try:
            run_pipeline(RunConfig(input_path=tmp_path / "absent.csv"))
        except StageError as err:
            text = render_report_text(err.report)
        assert "[failure]" in text
        assert "stage: input" in text

    def test_no_timestamps_or_environment(self):
        report = run_pipeline(RunConfig(fixture="fig3"))
        text = render_report_text(report)
        assert "202" not in text.split("[correlation]")[0]   # no dates in header


class TestEmitAndDeterminism:
    def test_fixture_reports_byte_identical(self, tmp_path):
        for fmt in ("text", "delim"):
            paths = []
            for d in ("a", "b"):
                report = run_pipeline(RunConfig(fixture="fig3"))
                paths.append(
                    emit_report(report, tmp_path / fmt / d, format=fmt)
                )
            assert paths[0][0].read_bytes() == paths[1][0].read_bytes()

    def test_table_reports_byte_identical(self, tmp_path):
        table = planted_panel_table(12)
        source = write_table(table, tmp_path / "t.csv")
        blobs = []
        for d in ("a", "b"):
            report = run_pipeline(RunConfig(input_path=source))
            written = emit_report(report, tmp_path / d, format="text")
            blobs.append([p.read_bytes() for p in written])
        assert blobs[0] == blobs[1]

    def test_scatter_written_in_table_mode_only(self, tmp_path):
        table = planted_panel_table(13)
        source = write_table(table, tmp_path / "t.csv")
        report = run_pipeline(RunConfig(input_path=source))
        written = emit_report(report, tmp_path / "out", format="delim")
        assert [p.name for p in written] == ["report.csv", "scatter_pairs.csv"]
        fixture_written = emit_report(
            run_pipeline(RunConfig(fixture="fig3")), tmp_path / "fx", format="delim"
        )
        assert [p.name for p in fixture_written] == ["report.csv"]

    def test_scatter_rows_cover_all_pairs(self, tmp_path):
        table = planted_panel_table(14)
        source = write_table(table, tmp_path / "t.csv")
        report = run_pipeline(RunConfig(input_path=source))
        written = emit_report(report, tmp_path / "out", format="delim")
        rows = list(csv.reader(io.StringIO(written[1].read_text())))
        assert rows[0] == ["x_name", "y_name", "year", "x", "y"]
        pairs = {(r[0], r[1]) for r in rows[1:]}
        assert len(pairs) == 36
        assert len(rows) - 1 == 36 * 20


class TestCli:
    def test_fixture_run_to_files(self, tmp_path, capsys):
        code = cli.main(
            ["--fixture", "fig3", "--out", str(tmp_path / "out")]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "report.txt" in out
        assert (tmp_path / "out" / "report.txt").exists()

    def test_stdout_report_without_out(self, capsys):
        assert cli.main(["--fixture", "fig3"]) == 0
        out = capsys.readouterr().out
        assert "[score weights]" in out

    def test_table_run_delim(self, tmp_path):
        table = planted_panel_table(15)
        source = write_table(table, tmp_path / "t.csv")
        code = cli.main(
            ["--input", str(source), "--out", str(tmp_path / "out"), "--format", "delim"]
        )
        assert code == 0
        assert (tmp_path / "out" / "report.csv").exists()
        assert (tmp_path / "out" / "scatter_pairs.csv").exists()

    def test_missing_source_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            cli.main([])
        assert excinfo.value.code == 2

    def test_unknown_fixture_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            cli.main(["--fixture", "nope"])
        assert excinfo.value.code == 2

    def test_bad_components_value_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            cli.main(["--fixture", "fig3", "--components", "two"])
        assert excinfo.value.code == 2

    def test_input_error_exit_code(self, tmp_path, capsys):
        code = cli.main(["--input", str(tmp_path / "absent.csv")])
        assert code == 2
        assert "[input]" in capsys.readouterr().err

    def test_preprocess_error_exit_code(self, tmp_path, capsys):
        p = tmp_path / "two.csv"
        p.write_text("year,IY,GVA\n2000,1,2\n2001,2,3\n")
        assert cli.main(["--input", str(p)]) == 3

    def test_pca_error_exit_code(self, tmp_path, capsys):
        table = planted_panel_table(16)
        source = write_table(table, tmp_path / "t.csv")
        assert cli.main(["--input", str(source), "--components", "20"]) == 4

    def test_regression_error_exit_code(self, tmp_path, capsys):
        p = tmp_path / "tiny.csv"
        p.write_text(
            "year,IY,A,B\n2000,1,5,3\n2001,4,9,2\n2002,2,4,7\n2003,5,8,1\n"
        )
        assert cli.main(["--input", str(p), "--components", "2"]) == 5

    def test_output_error_exit_code(self, tmp_path, capsys):
        blocker = tmp_path / "blocker"
        blocker.write_text("in the way")
        code = cli.main(
            ["--fixture", "fig3", "--out", str(blocker / "sub")]
        )
        assert code == 6
        assert "[output]" in capsys.readouterr().err

    def test_partial_report_written_on_failure(self, tmp_path, capsys):
        table = planted_panel_table(17)
        source = write_table(table, tmp_path / "t.csv")
        out = tmp_path / "out"
        code = cli.main(
            ["--input", str(source), "--components", "20", "--out", str(out)]
        )
        assert code == 4
        text = (out / "report.txt").read_text()
        assert "[failure]" in text
        assert "stage: pca" in text

    def test_ridge_flag_unblocks_duplicate(self, tmp_path, capsys):
        table = planted_panel_table(18, duplicate="GVA")
        source = write_table(table, tmp_path / "t.csv")
        assert cli.main(["--input", str(source), "--components", "2"]) == 4
        capsys.readouterr()
        assert (
            cli.main(["--input", str(source), "--components", "2", "--ridge"]) == 0
        )

    def test_rotation_none_flag(self, capsys):
        assert cli.main(["--fixture", "fig3", "--rotation", "none"]) == 0
        out = capsys.readouterr().out
        assert "[rotated loadings]" not in out
        assert "PC1" in out
