import math

import numpy as np
import pytest

from _oracles import SKEWED, entropy_sum
from rdeprivacy.categorical import reverse_waterfill
from rdeprivacy.errors import DataError
from rdeprivacy.infotheory import Pmf, SanitizationChannel
from rdeprivacy.sanitizer import (
    Database,
    evaluate,
    fit_empirical_pmf,
    row_uniforms,
    sanitize_rows,
)

N_BIG = 10**6
LABELS = tuple(str(i) for i in range(8))


def single_column(values, labels=LABELS, name="X"):
    return Database((name,), (labels,), np.asarray(values)[:, None])


@pytest.fixture(scope="module")
def big_db():
    rng = np.random.default_rng(2024)
    return single_column(rng.choice(8, size=N_BIG, p=SKEWED))


@pytest.fixture(scope="module")
def waterfill():
    return reverse_waterfill(Pmf(SKEWED), 0.25)


@pytest.fixture(scope="module")
def sanitized_big(big_db, waterfill):
    return sanitize_rows(big_db, waterfill.forward_channel, seed=7)


# -- fitting ------------------------------------------------------------------


def test_fit_degenerate():
    db = Database.from_labels({"A": ["x"] * 4})
    np.testing.assert_array_equal(fit_empirical_pmf(db).table, [1.0])


def test_fit_equal_counts():
    db = Database.from_labels({"A": ["0", "1", "1", "0"]})
    np.testing.assert_allclose(fit_empirical_pmf(db).table, [0.5, 0.5], atol=0)


def test_fit_smoothing_adds_pseudocounts():
    db = Database.from_labels({"A": ["0", "0", "0"]}, alphabets={"A": ("0", "1")})
    np.testing.assert_allclose(fit_empirical_pmf(db, alpha=1.0).table, [0.8, 0.2])
    with pytest.raises(DataError):
        fit_empirical_pmf(db, alpha=-1.0)


def test_fit_two_attributes_and_split():
    db = Database.from_labels({"A": ["0", "0", "1", "1"], "B": ["u", "v", "v", "v"]})
    joint = fit_empirical_pmf(db, ["A", "B"], public=["B"], private=["A"])
    np.testing.assert_allclose(joint.table, [[0.25, 0.25], [0.0, 0.5]])
    assert joint.public == (1,) and joint.private == (0,)


def test_fit_errors():
    db = Database.from_labels({"A": ["0", "1"]})
    with pytest.raises(DataError):
        fit_empirical_pmf(db, ["nope"])
    with pytest.raises(DataError):
        Database.from_labels({"A": []})
    with pytest.raises(DataError):
        Database(("A",), (("0",),), np.array([[1]]))


def test_fit_large_sample_matches_truth(big_db):
    freq = fit_empirical_pmf(big_db).table
    assert np.max(np.abs(freq - SKEWED)) < 0.002


def test_csv_round_trip(tmp_path):
    db = Database.from_labels({"A": ["a", "b", "a"], "B": ["1", "1", "2"]})
    path = tmp_path / "db.csv"
    db.to_csv(path)
    back = Database.from_csv(path)
    assert back.attributes == db.attributes
    assert back.to_csv() == db.to_csv()


def test_csv_ragged_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("A,B\n1,2\n3\n")
    with pytest.raises(DataError):
        Database.from_csv(path)


# -- row randomness -----------------------------------------------------------


def test_row_uniforms_do_not_depend_on_chunking():
    whole = row_uniforms(11, 0, 1000)
    parts = np.concatenate([row_uniforms(11, 0, 313), row_uniforms(11, 313, 1000)])
    np.testing.assert_array_equal(whole, parts)
    assert whole.min() >= 0.0 and whole.max() < 1.0
    assert not np.array_equal(whole, row_uniforms(12, 0, 1000))


def test_row_uniforms_look_uniform():
    u = row_uniforms(3, 0, 200_000)
    counts = np.bincount((u * 10).astype(int), minlength=10)
    expected = u.size / 10
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    assert chi2 < 40.0  # 9 degrees of freedom; far beyond the 0.9999 quantile


# -- sanitize ----------------------------------------------------------------


def test_identity_channel_is_identity(big_db):
    small = Database(big_db.attributes, big_db.alphabets, big_db.rows[:5000])
    out = sanitize_rows(small, SanitizationChannel.identity(LABELS), seed=1)
    np.testing.assert_array_equal(out.rows, small.rows)


def test_constant_channel(big_db):
    small = Database(big_db.attributes, big_db.alphabets, big_db.rows[:20000])
    ch = SanitizationChannel.constant(8, np.eye(8)[0], LABELS, LABELS)
    out = sanitize_rows(small, ch, seed=1)
    assert np.all(out.labels("X") == "0")
    rep = evaluate(small, out, ch)
    p0 = float(np.mean(small.rows[:, 0] == 0))
    assert rep.empirical_D == pytest.approx(1.0 - p0, abs=1e-12)


def test_deterministic_across_workers(big_db, waterfill):
    small = Database(big_db.attributes, big_db.alphabets, big_db.rows[:200_000])
    ch = waterfill.forward_channel
    a = sanitize_rows(small, ch, seed=5, workers=1)
    b = sanitize_rows(small, ch, seed=5, workers=4)
    c = sanitize_rows(small, ch, seed=5, workers=3)
    np.testing.assert_array_equal(a.rows, b.rows)
    np.testing.assert_array_equal(a.rows, c.rows)
    assert not np.array_equal(a.rows, sanitize_rows(small, ch, seed=6).rows)


def test_thread_count_from_environment(big_db, waterfill, monkeypatch):
    small = Database(big_db.attributes, big_db.alphabets, big_db.rows[:50_000])
    ch = waterfill.forward_channel
    monkeypatch.setenv("RDEPRIV_THREADS", "4")
    a = sanitize_rows(small, ch, seed=5)
    monkeypatch.setenv("RDEPRIV_THREADS", "1")
    b = sanitize_rows(small, ch, seed=5)
    np.testing.assert_array_equal(a.rows, b.rows)


def test_suppressed_symbols_absent(sanitized_big, waterfill):
    present = set(np.unique(sanitized_big.rows[:, 0]).tolist())
    assert present.isdisjoint(waterfill.suppressed)
    assert set(waterfill.suppressed) == {4, 5, 6, 7}


def test_output_frequencies_match_design(sanitized_big, waterfill):
    freq = np.bincount(sanitized_big.rows[:, 0], minlength=8) / N_BIG
    assert np.max(np.abs(freq - waterfill.output_pmf.probs)) < 0.005


def test_empirical_distortion_concentrates(big_db, sanitized_big, waterfill):
    rep = evaluate(big_db, sanitized_big, waterfill.forward_channel, target_D=0.25, seed=7)
    assert abs(rep.empirical_D - 0.25) < 0.005
    assert abs(rep.empirical_D - 0.25) <= 4 * math.sqrt(0.25 * 0.75 / N_BIG)
    assert 0.0 <= rep.empirical_D <= 1.0


def test_equivocations_of_waterfill(big_db, sanitized_big, waterfill):
    rep = evaluate(big_db, sanitized_big, waterfill.forward_channel)
    # design joint fitted from the data; the plug-in reweights its posteriors
    # by the empirical output frequencies, so both sit near the closed form
    assert rep.analytic_equivocation == pytest.approx(waterfill.equivocation, abs=0.01)
    assert rep.plugin_equivocation == pytest.approx(rep.analytic_equivocation, abs=0.01)
    assert rep.private_entropy == pytest.approx(entropy_sum(SKEWED), abs=0.01)


def test_unseen_symbol_rejected_by_default():
    ch = SanitizationChannel.identity(("a", "b"))
    db = Database.from_labels({"X": ["a", "b", "c"]})
    with pytest.raises(DataError, match="no channel row"):
        sanitize_rows(db, ch, seed=0)


def test_unseen_symbol_suppressed_on_request():
    ch = SanitizationChannel.identity(("a", "b"))
    labels = ["a"] * 300 + ["b"] * 100 + ["c"] * 2000
    db = Database.from_labels({"X": labels})
    out = sanitize_rows(db, ch, seed=0, unseen="suppress")
    got = out.labels("X")
    np.testing.assert_array_equal(got[:400], labels[:400])
    # 'c' draws from the output law under the known symbols: 3/4 'a'
    frac_a = float(np.mean(got[400:] == "a"))
    assert abs(frac_a - 0.75) < 4 * math.sqrt(0.75 * 0.25 / 2000)
    assert "c" not in set(got.tolist())


def test_bad_unseen_flag():
    db = Database.from_labels({"X": ["a"]})
    with pytest.raises(ValueError):
        sanitize_rows(db, SanitizationChannel.identity(("a",)), seed=0, unseen="maybe")


def test_product_channel_and_dropped_private_column():
    # two public columns sanitized as one product symbol, private column dropped
    rng = np.random.default_rng(0)
    n = 5000
    db = Database(
        ("H", "A", "B"),
        (("h0", "h1"), ("0", "1"), ("0", "1")),
        rng.integers(0, 2, size=(n, 3)),
    )
    labels = ("0|0", "0|1", "1|0", "1|1")
    swap = np.array([[0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0]], dtype=float)
    out = sanitize_rows(db, SanitizationChannel(swap, labels, labels), seed=3, public=["A", "B"], drop=["H"])
    assert out.attributes == ("A", "B")
    np.testing.assert_array_equal(out.rows, 1 - db.rows[:, 1:])


def test_channel_output_labels_must_split():
    db = Database.from_labels({"A": ["0", "1"], "B": ["0", "1"]})
    ch = SanitizationChannel(np.eye(4), ("0|0", "0|1", "1|0", "1|1"), ("w", "x", "y", "z"))
    with pytest.raises(DataError):
        sanitize_rows(db, ch, seed=0, public=["A", "B"])


# -- evaluate ----------------------------------------------------------------


def test_evaluate_identity(big_db):
    small = Database(big_db.attributes, big_db.alphabets, big_db.rows[:10000])
    ch = SanitizationChannel.identity(LABELS)
    out = sanitize_rows(small, ch, seed=2)
    rep = evaluate(small, out, ch)
    assert rep.empirical_D == 0.0
    assert rep.analytic_equivocation == pytest.approx(0.0, abs=1e-12)
    assert rep.plugin_equivocation == pytest.approx(0.0, abs=1e-12)


def test_evaluate_constant_channel_keeps_full_uncertainty(big_db):
    small = Database(big_db.attributes, big_db.alphabets, big_db.rows[:10000])
    ch = SanitizationChannel.constant(8, np.eye(8)[2], LABELS, LABELS)
    rep = evaluate(small, sanitize_rows(small, ch, seed=2), ch)
    assert rep.analytic_equivocation == pytest.approx(rep.private_entropy, abs=1e-12)
    assert rep.plugin_equivocation == pytest.approx(rep.private_entropy, abs=1e-12)


def test_evaluate_row_mismatch():
    db = Database.from_labels({"X": ["a", "b"]})
    other = Database.from_labels({"X": ["a"]})
    with pytest.raises(DataError, match="row counts"):
        evaluate(db, other, SanitizationChannel.identity(("a", "b")))


def test_report_json_round_trip(big_db, waterfill, tmp_path):
    import json

    small = Database(big_db.attributes, big_db.alphabets, big_db.rows[:1000])
    rep = evaluate(small, sanitize_rows(small, waterfill.forward_channel, seed=1), waterfill.forward_channel, seed=1)
    d = json.loads(rep.to_json(tmp_path / "r.json"))
    assert d["n"] == 1000 and d["seed"] == 1
    assert d["plugin_equivocation"] >= 0.0
