import pytest

from sprel.errors import ValidationError
from sprel.geometry import Relation
from sprel.metrics import EvalConfig, EvalReport, MetricCounts
from sprel.reports import (
    bias_table,
    frequency_correlation,
    per_relation_table,
    render_per_relation_text,
    sample_qualitative_triplets,
    write_bias_csv,
    write_frequency_csv,
    write_per_relation_csv,
)
from sprel.triplets import SpatialTriplet, TripletTable


def fake_report(per_triplet, digest="d0"):
    """EvalReport assembled from {(subject, relation, object): (n, oa, visor)}."""
    overall = MetricCounts()
    per_relation = {}
    triplet_counts = {}
    for (subj, relation, obj), (n, oa, vis) in per_triplet.items():
        t = SpatialTriplet(subj, relation, obj)
        counts = MetricCounts(n_images=n, n_oa=oa, n_visor=vis)
        triplet_counts[t] = counts
        overall.merge(counts)
        per_relation.setdefault(relation, MetricCounts()).merge(counts)
    return EvalReport(
        config=EvalConfig(),
        overall=overall,
        per_relation=per_relation,
        per_triplet=triplet_counts,
        caption_count=len(per_triplet),
        caption_digest=digest,
    )


@pytest.fixture
def simple_report():
    return fake_report(
        {
            ("dog", Relation.LEFT_OF, "cat"): (4, 4, 4),
            ("dog", Relation.SEPARATED, "cat"): (4, 4, 3),
            ("cat", Relation.TALLER, "dog"): (4, 2, 1),
            ("cat", Relation.SHORTER, "dog"): (4, 4, 2),
        }
    )


class TestPerRelationTable:
    def test_all_correct_relation_rows_100(self, simple_report):
        rows = per_relation_table(simple_report)
        by_relation = {r["relation"]: r for r in rows}
        assert by_relation["left_of"]["visor_cond"] == 100.0
        assert by_relation["separated"]["visor_cond"] == 75.0

    def test_absent_relation_rows_none(self, simple_report):
        rows = per_relation_table(simple_report)
        by_relation = {r["relation"]: r for r in rows}
        assert by_relation["above"]["visor_cond"] is None
        assert len(rows) == 14

    def test_self_baseline_zero_deltas(self, simple_report):
        rows = per_relation_table(simple_report, simple_report)
        for row in rows:
            if row["visor_cond"] is not None:
                assert row["delta"] == 0.0

    def test_caption_set_mismatch_rejected(self, simple_report):
        other = fake_report({("dog", Relation.LEFT_OF, "cat"): (4, 4, 4)}, digest="other")
        with pytest.raises(ValidationError):
            per_relation_table(simple_report, other)

    def test_text_rendering_delta_style(self, simple_report):
        shifted = fake_report(
            {
                ("dog", Relation.LEFT_OF, "cat"): (4, 4, 3),
                ("dog", Relation.SEPARATED, "cat"): (4, 4, 3),
                ("cat", Relation.TALLER, "dog"): (4, 2, 1),
                ("cat", Relation.SHORTER, "dog"): (4, 4, 2),
            }
        )
        text = render_per_relation_text(per_relation_table(simple_report, shifted))
        assert "(+25.0)" in text
        assert "100.0" in text


class TestBiasTable:
    def test_seven_rows_six_flagged(self, simple_report):
        rows = bias_table(simple_report)
        assert len(rows) == 7
        flagged = [r for r in rows if r["in_conventional_figure"]]
        assert len(flagged) == 6
        excluded = next(r for r in rows if not r["in_conventional_figure"])
        assert excluded["pair"] == "overlapping/separated"

    def test_delta_subtraction(self):
        report = fake_report(
            {
                ("cat", Relation.TALLER, "dog"): (100, 100, 756, ),
                ("cat", Relation.SHORTER, "dog"): (100, 100, 690),
            }
        )
        # visor_cond 75.6 vs 69.0 per mille counts scaled: use percent values
        rows = {r["pair"]: r for r in bias_table(report)}
        row = rows["taller/shorter"]
        assert row["visor_cond_first"] == pytest.approx(756.0)
        assert row["visor_cond_second"] == pytest.approx(690.0)
        assert row["delta"] == pytest.approx(66.0)

    def test_published_style_values(self):
        # 75.6 and 69.0 conditional visor -> 6.6 difference
        report = fake_report(
            {
                ("cat", Relation.TALLER, "dog"): (1000, 1000, 756),
                ("cat", Relation.SHORTER, "dog"): (1000, 1000, 690),
            }
        )
        row = next(r for r in bias_table(report) if r["pair"] == "taller/shorter")
        assert row["delta"] == pytest.approx(6.6)

    def test_symmetric_run_zero_deltas(self):
        counts = {}
        for a, b, rel in (
            ("dog", "cat", Relation.TALLER),
            ("dog", "cat", Relation.SHORTER),
            ("dog", "cat", Relation.LEFT_OF),
            ("dog", "cat", Relation.RIGHT_OF),
        ):
            counts[(a, rel, b)] = (10, 8, 6)
        rows = bias_table(fake_report(counts))
        for row in rows:
            if row["delta"] is not None:
                assert row["delta"] == 0.0

    def test_missing_member_absent(self, simple_report):
        rows = {r["pair"]: r for r in bias_table(simple_report)}
        assert rows["surrounding/inside"]["delta"] is None

    def test_antisymmetry(self, simple_report):
        rows = {r["pair"]: r for r in bias_table(simple_report)}
        row = rows["taller/shorter"]
        # swapping the pair orientation flips the sign exactly
        assert row["delta"] == -(row["visor_cond_second"] - row["visor_cond_first"])


class TestFrequencyCorrelation:
    def test_bin_assignment(self):
        report = fake_report({("dog", Relation.LEFT_OF, "cat"): (4, 4, 2)})
        freq = TripletTable({SpatialTriplet("dog", Relation.LEFT_OF, "cat"): 250})
        bins = frequency_correlation(report, freq)
        target = next(b for b in bins if b.label == "[100,1000)")
        assert target.n_triplets == 1
        assert target.counts.n_images == 4

    def test_single_bin_matches_overall(self):
        report = fake_report(
            {
                ("dog", Relation.LEFT_OF, "cat"): (4, 4, 2),
                ("cat", Relation.TALLER, "dog"): (4, 2, 1),
            }
        )
        freq = TripletTable(
            {
                SpatialTriplet("dog", Relation.LEFT_OF, "cat"): 5,
                SpatialTriplet("cat", Relation.TALLER, "dog"): 7,
            }
        )
        bins = frequency_correlation(report, freq)
        target = next(b for b in bins if b.label == "[1,10)")
        assert target.counts.visor_cond_percent == report.overall.visor_cond_percent

    def test_pooled_not_mean_of_means(self):
        # (1 of 2) and (3 of 4) pooled in separate bins -> 50.0 and 75.0
        report = fake_report(
            {
                ("dog", Relation.LEFT_OF, "cat"): (4, 2, 1),
                ("cat", Relation.TALLER, "dog"): (4, 4, 3),
            }
        )
        freq = TripletTable(
            {
                SpatialTriplet("dog", Relation.LEFT_OF, "cat"): 5,
                SpatialTriplet("cat", Relation.TALLER, "dog"): 50,
            }
        )
        bins = {b.label: b for b in frequency_correlation(report, freq)}
        assert bins["[1,10)"].counts.visor_cond_percent == 50.0
        assert bins["[10,100)"].counts.visor_cond_percent == 75.0

    def test_zero_frequency_bin(self):
        report = fake_report({("dog", Relation.LEFT_OF, "cat"): (4, 4, 2)})
        bins = frequency_correlation(report, TripletTable())
        assert bins[0].label == "0"
        assert bins[0].n_triplets == 1

    def test_overflow_bin(self):
        report = fake_report({("dog", Relation.LEFT_OF, "cat"): (4, 4, 2)})
        freq = TripletTable({SpatialTriplet("dog", Relation.LEFT_OF, "cat"): 2_000_000})
        bins = frequency_correlation(report, freq)
        assert bins[-1].n_triplets == 1

    def test_bins_recompose_overall(self):
        report = fake_report(
            {
                ("dog", Relation.LEFT_OF, "cat"): (4, 3, 2),
                ("cat", Relation.TALLER, "dog"): (4, 2, 1),
                ("dog", Relation.ABOVE, "car"): (4, 4, 4),
                ("car", Relation.WIDER, "dog"): (4, 1, 0),
            }
        )
        freq = TripletTable(
            {
                SpatialTriplet("dog", Relation.LEFT_OF, "cat"): 3,
                SpatialTriplet("cat", Relation.TALLER, "dog"): 450,
                SpatialTriplet("dog", Relation.ABOVE, "car"): 45_000,
            }
        )
        bins = frequency_correlation(report, freq)
        assert sum(b.counts.n_images for b in bins) == report.overall.n_images
        assert sum(b.counts.n_oa for b in bins) == report.overall.n_oa
        assert sum(b.counts.n_visor for b in bins) == report.overall.n_visor
        assert sum(b.n_triplets for b in bins) == len(report.per_triplet)

    def test_bad_edges_rejected(self):
        report = fake_report({("dog", Relation.LEFT_OF, "cat"): (4, 4, 2)})
        with pytest.raises(ValidationError):
            frequency_correlation(report, TripletTable(), edges=(1, 10, 10))


class TestQualitativeSampling:
    def _freq(self):
        table = TripletTable()
        labels = ["dog", "cat", "car", "chair", "person", "bowl"]
        count = 1
        for i, a in enumerate(labels):
            for b in labels[i + 1 :]:
                table.add(SpatialTriplet(a, Relation.LEFT_OF, b), count)
                count = count * 3 + 1
        return table

    def test_range_inclusive(self):
        freq = self._freq()
        chosen = sample_qualitative_triplets(freq, 100, 1000, 2, seed=1)
        assert chosen
        for t in chosen:
            assert 100 <= freq.count(t) <= 1000

    def test_requesting_more_than_available_warns(self):
        freq = self._freq()
        with pytest.warns(UserWarning):
            chosen = sample_qualitative_triplets(freq, 100, 1000, 50, seed=1)
        assert chosen == sample_qualitative_triplets(freq, 100, 1000, len(chosen), seed=9)

    def test_seeded_determinism(self):
        freq = self._freq()
        assert sample_qualitative_triplets(freq, 1, 10_000, 4, seed=3) == \
            sample_qualitative_triplets(freq, 1, 10_000, 4, seed=3)

    def test_bad_range_rejected(self):
        with pytest.raises(ValidationError):
            sample_qualitative_triplets(TripletTable(), 10, 10, 1, seed=0)


class TestCsvEmission:
    def test_one_decimal_and_byte_stable(self, tmp_path, simple_report):
        rows = per_relation_table(simple_report)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_per_relation_csv(rows, a)
        write_per_relation_csv(rows, b)
        assert a.read_bytes() == b.read_bytes()
        body = a.read_text()
        assert "separated,topological,4,4,75.0" in body  # one decimal place
        assert "above,projective,0,0,\n" in body  # absent stays empty

    def test_bias_csv(self, tmp_path, simple_report):
        path = tmp_path / "bias.csv"
        write_bias_csv(bias_table(simple_report), path)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("pair,")
        assert len(lines) == 8

    def test_frequency_csv(self, tmp_path, simple_report):
        freq = TripletTable({t: 50 for t in simple_report.per_triplet})
        bins = frequency_correlation(simple_report, freq)
        path = tmp_path / "freq.csv"
        write_frequency_csv(bins, path, comment="provenance")
        lines = path.read_text().splitlines()
        assert lines[0] == "# provenance"
        assert lines[1].startswith("bin,")
