import numpy as np
import pytest

from driverid.features import (
    FeatureConfig,
    Standardizer,
    apply_standardizer,
    extract,
    extract_sequence,
    feature_config_from_families,
    feature_schema,
    fit_standardizer,
    pairwise_correlation,
    schema_labels,
    trimmed_histogram,
    window_difference,
    window_mean,
    window_variance,
)
from driverid.segment import Window


def make_window(channels, driver="d", partition="train", start=0.0):
    channels = np.asarray(channels, dtype=float)
    return Window(
        driver_id=driver,
        start_t=start,
        end_t=start + channels.shape[1] / 2.0,
        channels=channels,
        partition=partition,
    )


def random_window(rng, n=64):
    return make_window(rng.standard_normal((6, n)) * rng.uniform(0.5, 4.0))


from oracles import corr_oracle, histogram_oracle, mean_var_oracle


class TestTrimmedHistogram:
    def test_constant_signal_one_hot(self):
        out = trimmed_histogram(np.full(50, 2.5), 100, 0.95)
        assert out[0] == 1.0
        assert out[1:].sum() == 0.0

    def test_uniform_grid_flat_histogram(self):
        out = trimmed_histogram(np.linspace(0, 1, 1000), 100, 1.0)
        assert np.allclose(out, 0.01, atol=0.002)

    def test_matches_counting_oracle_exactly(self):
        rng = np.random.default_rng(12)
        for _ in range(100):
            n = int(rng.integers(20, 400))
            signal = rng.standard_normal(n) * rng.uniform(0.1, 10)
            bins = int(rng.integers(2, 120))
            keep = float(rng.choice([0.5, 0.9, 0.95, 1.0]))
            ours = trimmed_histogram(signal, bins, keep)
            oracle = histogram_oracle(signal, bins, keep)
            assert np.allclose(ours, oracle, atol=0), f"n={n} bins={bins} keep={keep}"

    def test_sums_to_one_and_nonnegative(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            out = trimmed_histogram(rng.standard_normal(200), 100, 0.95)
            assert abs(out.sum() - 1.0) < 1e-9
            assert (out >= 0).all()

    def test_trim_bound(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            n = int(rng.integers(10, 500))
            signal = rng.standard_normal(n)
            keep = 0.95
            tail = (1 - keep) / 2
            q_lo, q_hi = np.quantile(signal, [tail, 1 - tail])
            outside = ((signal < q_lo) | (signal > q_hi)).sum()
            assert outside <= np.ceil((1 - keep) * n) + 1

    def test_shift_leaves_bin_occupancy_unchanged(self):
        rng = np.random.default_rng(8)
        signal = rng.standard_normal(300)
        a = trimmed_histogram(signal, 50, 0.95)
        b = trimmed_histogram(signal + 123.45, 50, 0.95)
        assert np.allclose(a, b, atol=1e-12)

    def test_too_short_signal_rejected(self):
        with pytest.raises(ValueError):
            trimmed_histogram(np.array([1.0]), 10, 0.95)


class TestMeanVariance:
    def test_constant_channel(self):
        w = make_window(np.full((6, 10), 4.0))
        assert np.allclose(window_mean(w), 4.0)
        assert np.allclose(window_variance(w), 0.0)

    def test_two_point_hand_case(self):
        channels = np.tile([1.0, 3.0], (6, 1))
        w = make_window(channels)
        assert np.allclose(window_mean(w), 2.0)
        assert np.allclose(window_variance(w), 1.0)  # population variance

    def test_matches_two_pass_oracle(self):
        rng = np.random.default_rng(21)
        for _ in range(100):
            w = random_window(rng, n=int(rng.integers(8, 200)))
            means = window_mean(w)
            variances = window_variance(w)
            for c in range(6):
                m, v = mean_var_oracle(list(w.channels[c]))
                assert means[c] == pytest.approx(m, rel=1e-12, abs=1e-12)
                assert variances[c] == pytest.approx(v, rel=1e-12, abs=1e-12)


class TestDifference:
    def test_first_window_is_zero(self):
        rng = np.random.default_rng(2)
        w = random_window(rng)
        assert np.array_equal(window_difference(w, None), np.zeros(6))

    def test_unit_shift_hand_case(self):
        prev = make_window(np.tile(np.arange(6, dtype=float)[:, None], (1, 4)))
        cur = make_window(np.tile(np.arange(1, 7, dtype=float)[:, None], (1, 4)))
        assert np.allclose(window_difference(cur, prev), 1.0)

    def test_matches_mean_delta_oracle_over_sequence(self):
        rng = np.random.default_rng(31)
        windows = [random_window(rng, 40) for _ in range(6)]
        cfg = FeatureConfig()
        vectors = extract_sequence(windows, cfg)
        schema = feature_schema(cfg)
        diff_cols = [i for i, s in enumerate(schema) if s[0] == "difference"]
        for k in range(1, len(windows)):
            expected = [
                (sum(windows[k].channels[c]) / len(windows[k]))
                - (sum(windows[k - 1].channels[c]) / len(windows[k - 1]))
                for c in range(6)
            ]
            assert np.allclose(vectors[k].values[diff_cols], expected, atol=1e-12)

    def test_mismatched_lengths_rejected(self):
        rng = np.random.default_rng(1)
        a = random_window(rng, 30)
        b = random_window(rng, 20)
        with pytest.raises(ValueError, match="mismatched"):
            window_difference(a, b)

    def test_sum_mode(self):
        prev = make_window(np.full((6, 4), 1.0))
        cur = make_window(np.full((6, 4), 2.0))
        out = window_difference(cur, prev, use_sum=True)
        assert np.allclose(out, 2.0 * 4 - 1.0)


class TestCorrelation:
    def test_identical_channels_give_one(self):
        rng = np.random.default_rng(4)
        base = rng.standard_normal(50)
        channels = np.vstack([base, base, rng.standard_normal((4, 50))])
        out = pairwise_correlation(make_window(channels))
        assert out[0] == pytest.approx(1.0)

    def test_negated_channel_gives_minus_one(self):
        rng = np.random.default_rng(5)
        base = rng.standard_normal(50)
        channels = np.vstack([base, -base, rng.standard_normal((4, 50))])
        out = pairwise_correlation(make_window(channels))
        assert out[0] == pytest.approx(-1.0)

    def test_zero_variance_channel_yields_zero(self):
        rng = np.random.default_rng(6)
        channels = rng.standard_normal((6, 40))
        channels[3] = 7.0
        out = pairwise_correlation(make_window(channels))
        schema_pairs = [(i, j) for i in range(6) for j in range(i + 1, 6)]
        for k, (i, j) in enumerate(schema_pairs):
            if i == 3 or j == 3:
                assert out[k] == 0.0

    def test_matches_direct_oracle(self):
        rng = np.random.default_rng(41)
        for _ in range(100):
            w = random_window(rng, n=int(rng.integers(8, 120)))
            ours = pairwise_correlation(w)
            k = 0
            for i in range(6):
                for j in range(i + 1, 6):
                    expected = corr_oracle(list(w.channels[i]), list(w.channels[j]))
                    assert ours[k] == pytest.approx(expected, rel=1e-12, abs=1e-12)
                    k += 1

    def test_reconstructed_matrix_symmetric_unit_diagonal(self):
        rng = np.random.default_rng(51)
        w = random_window(rng)
        vals = pairwise_correlation(w)
        mat = np.eye(6)
        k = 0
        for i in range(6):
            for j in range(i + 1, 6):
                mat[i, j] = mat[j, i] = vals[k]
                k += 1
        assert np.allclose(mat, mat.T)
        assert np.allclose(np.diag(mat), 1.0)
        assert (np.abs(vals) <= 1.0).all()


class TestExtract:
    def test_full_dimension_is_633(self):
        cfg = FeatureConfig()
        assert cfg.dimension() == 633
        rng = np.random.default_rng(61)
        vec = extract(random_window(rng), None, cfg)
        assert vec.values.shape == (633,)

    def test_histogram_only_is_600(self):
        cfg = feature_config_from_families(["histogram"])
        assert cfg.dimension() == 600

    def test_mean_plus_correlation_is_21(self):
        cfg = feature_config_from_families(["mean", "correlation"])
        assert cfg.dimension() == 21

    def test_schema_deterministic(self):
        cfg = FeatureConfig(histogram_bins=10)
        assert feature_schema(cfg) == feature_schema(FeatureConfig(histogram_bins=10))

    def test_schema_family_order_fixed(self):
        cfg = FeatureConfig(histogram_bins=2)
        families = [entry[0] for entry in feature_schema(cfg)]
        seen = list(dict.fromkeys(families))
        assert seen == ["histogram", "mean", "variance", "difference", "correlation"]

    def test_shift_invariance_of_variance_correlation_histogram(self):
        rng = np.random.default_rng(71)
        w = random_window(rng)
        shifted = make_window(w.channels + 55.0)
        cfg = feature_config_from_families(["histogram", "variance", "correlation"])
        a = extract(w, None, cfg)
        b = extract(shifted, None, cfg)
        assert np.allclose(a.values, b.values, atol=1e-9)

    def test_at_least_one_family_required(self):
        with pytest.raises(ValueError):
            feature_config_from_families([])

    def test_unknown_family_rejected(self):
        with pytest.raises(ValueError, match="unknown"):
            feature_config_from_families(["histogram", "wavelet"])

    def test_labels_match_schema_length(self):
        cfg = FeatureConfig()
        assert len(schema_labels(feature_schema(cfg))) == 633


class TestExportFeatures:
    def test_csv_and_schema_sidecar(self, tmp_path):
        from driverid.features import export_features

        rng = np.random.default_rng(91)
        cfg = feature_config_from_families(["mean", "correlation"])
        vectors = extract_sequence([random_window(rng, 30) for _ in range(4)], cfg)
        csv_path = tmp_path / "features.csv"
        schema_path = tmp_path / "features.schema.json"
        export_features(vectors, csv_path, schema_path)

        lines = csv_path.read_text().splitlines()
        header = lines[0].split(",")
        assert len(lines) == 5
        assert header[:21] == list(schema_labels(vectors[0].schema))
        assert header[-2:] == ["driver_id", "partition"]
        # values round-trip exactly through the repr formatting
        first = [float(v) for v in lines[1].split(",")[:21]]
        assert np.array_equal(np.array(first), vectors[0].values)

        import json

        schema_doc = json.loads(schema_path.read_text())
        assert len(schema_doc["schema"]) == 21


class TestStandardizer:
    def fit_matrix(self, rng, n=40, dim=12):
        return rng.standard_normal((n, dim)) * rng.uniform(0.5, 3.0, size=dim) + rng.uniform(
            -5, 5, size=dim
        )

    def test_train_set_becomes_zero_mean_unit_variance(self):
        rng = np.random.default_rng(81)
        x = self.fit_matrix(rng)
        std = fit_standardizer(x)
        z = apply_standardizer(std, x)
        assert np.abs(z.mean(axis=0)).max() < 1e-9
        assert np.abs(z.var(axis=0) - 1.0).max() < 1e-6

    def test_constant_dimension_floored_to_zero_output(self):
        rng = np.random.default_rng(82)
        x = self.fit_matrix(rng)
        x[:, 3] = 42.0
        std = fit_standardizer(x)
        z = apply_standardizer(std, x)
        assert np.allclose(z[:, 3], 0.0)

    def test_vector_equal_to_mean_maps_to_zero(self):
        rng = np.random.default_rng(83)
        x = self.fit_matrix(rng)
        std = fit_standardizer(x)
        assert np.allclose(apply_standardizer(std, x.mean(axis=0)), 0.0, atol=1e-12)

    def test_dimension_mismatch_rejected(self):
        rng = np.random.default_rng(84)
        std = fit_standardizer(self.fit_matrix(rng))
        with pytest.raises(ValueError, match="dimension mismatch"):
            apply_standardizer(std, np.zeros(5))

    def test_refuses_test_partition_vectors(self):
        rng = np.random.default_rng(85)
        cfg = feature_config_from_families(["mean"])
        train = extract(random_window(rng), None, cfg)
        test = extract(
            make_window(rng.standard_normal((6, 30)), partition="test"), None, cfg
        )
        with pytest.raises(ValueError, match="train vectors only"):
            fit_standardizer([train, test])

    def test_needs_two_vectors(self):
        rng = np.random.default_rng(86)
        with pytest.raises(ValueError, match="at least 2"):
            fit_standardizer(rng.standard_normal((1, 4)))

    def test_apply_never_refits(self):
        rng = np.random.default_rng(87)
        x = self.fit_matrix(rng)
        std = fit_standardizer(x)
        mean_before = std.mean.copy()
        apply_standardizer(std, rng.standard_normal((10, x.shape[1])) * 100)
        assert np.array_equal(std.mean, mean_before)

    def test_rejects_nonpositive_std(self):
        with pytest.raises(ValueError):
            Standardizer(mean=np.zeros(3), std=np.array([1.0, 0.0, 1.0]))
