"""Unit tests for distribution specs, seeded streams, and sampling.

Tests cover:
- DistributionSpec validation and the benchmark case table
- label parsing
- SeedScheme determinism and stream disjointness
- sampled draws following the right law (KS check against scipy CDFs)
- standardize and sample_moments
"""

from __future__ import annotations

import numpy as np
import pytest
import scipy.stats

from dnt.errors import InsufficientDataError, InvalidArgumentError
from dnt.sampling import (
    KINDS,
    DistributionSpec,
    Sample,
    SeedScheme,
    benchmark_cases,
    case_spec,
    parse_distribution_label,
    sample,
    sample_moments,
    standardize,
)

EXPECTED_LABELS = {
    1: "t(2)",
    2: "t(5)",
    3: "t(10)",
    4: "t(50)",
    5: "U(0,1)",
    6: "Beta(2,2)",
    7: "Laplace(0,1)",
    8: "Beta(6,2)",
    9: "Beta(3,2)",
    10: "Beta(2,1)",
    11: "Gamma(1,5)",
    12: "Gamma(4,5)",
    13: "ChiSq(4)",
    14: "ChiSq(20)",
    15: "N(0,1)",
}


class TestDistributionSpec:
    """Spec construction and validation."""

    def test_benchmark_table_complete(self) -> None:
        """The benchmark table has cases 1..15 with the expected labels."""
        cases = benchmark_cases()
        assert sorted(cases) == list(range(1, 16))
        assert {cid: spec.label for cid, spec in cases.items()} == EXPECTED_LABELS

    def test_null_case_is_standard_normal(self) -> None:
        """Case 15 is Normal(0, 1)."""
        spec = case_spec(15)
        assert spec.kind == "Normal"
        assert spec.params == (0.0, 1.0)

    def test_gamma_params_are_shape_rate(self) -> None:
        """Gamma cases carry (shape, rate) parameters."""
        assert case_spec(11).params == (1.0, 5.0)
        assert case_spec(12).params == (4.0, 5.0)

    def test_rejects_unknown_kind(self) -> None:
        with pytest.raises(InvalidArgumentError):
            DistributionSpec("Cauchy", (0.0, 1.0))

    @pytest.mark.parametrize(
        "kind, params",
        [
            ("Normal", (0.0, 0.0)),
            ("Normal", (0.0,)),
            ("StudentT", (0.0,)),
            ("Uniform", (1.0, 1.0)),
            ("Uniform", (2.0, 1.0)),
            ("Beta", (0.0, 2.0)),
            ("Gamma", (1.0, 0.0)),
            ("ChiSquare", (-4.0,)),
            ("Laplace", (0.0, -1.0)),
        ],
    )
    def test_rejects_invalid_params(self, kind: str, params: tuple) -> None:
        with pytest.raises(InvalidArgumentError):
            DistributionSpec(kind, params)

    def test_rejects_case_id_mismatch(self) -> None:
        """A case id must match the benchmark table row exactly."""
        with pytest.raises(InvalidArgumentError):
            DistributionSpec("StudentT", (3.0,), case_id=1)
        with pytest.raises(InvalidArgumentError):
            DistributionSpec("Normal", (0.0, 1.0), case_id=16)

    def test_case_spec_out_of_range(self) -> None:
        with pytest.raises(InvalidArgumentError):
            case_spec(0)


class TestParseDistributionLabel:
    """Text labels round-trip into specs."""

    def test_benchmark_labels_round_trip(self) -> None:
        """Every benchmark label parses back to its own case."""
        for cid, spec in benchmark_cases().items():
            parsed = parse_distribution_label(spec.label)
            assert parsed.case_id == cid
            assert parsed.kind == spec.kind
            assert parsed.params == spec.params

    @pytest.mark.parametrize(
        "text, kind, params",
        [
            ("normal", "Normal", (0.0, 1.0)),
            ("gaussian(2, 3)", "Normal", (2.0, 3.0)),
            ("t(7)", "StudentT", (7.0,)),
            ("uniform", "Uniform", (0.0, 1.0)),
            ("beta(2.5, 1)", "Beta", (2.5, 1.0)),
            ("chisq(4)", "ChiSquare", (4.0,)),
            ("chi2(4)", "ChiSquare", (4.0,)),
            ("gamma(2, 0.5)", "Gamma", (2.0, 0.5)),
        ],
    )
    def test_aliases(self, text: str, kind: str, params: tuple) -> None:
        parsed = parse_distribution_label(text)
        assert parsed.kind == kind
        assert parsed.params == params

    @pytest.mark.parametrize("text", ["", "cauchy(1)", "beta", "t(2", "t()"])
    def test_rejects_malformed_labels(self, text: str) -> None:
        with pytest.raises(InvalidArgumentError):
            parse_distribution_label(text)


class TestSeedScheme:
    """Substream derivation from a master seed."""

    def test_stream_is_pure(self) -> None:
        """The same triple always maps to the same 64-bit seed."""
        scheme = SeedScheme(42)
        assert scheme.stream(3, 17, "test") == scheme.stream(3, 17, "test")
        assert 0 <= scheme.stream(3, 17, "test") < 2**64

    def test_distinct_masters_decouple(self) -> None:
        """Different master seeds give different streams."""
        assert SeedScheme(1).stream(1, 0, "test") != SeedScheme(2).stream(1, 0, "test")

    def test_purposes_decouple(self) -> None:
        """Training, calibration, and test streams never coincide."""
        scheme = SeedScheme(0)
        purposes = ("train-h0", "train-h1", "calibrate", "test")
        seeds = {scheme.stream(15, 7, purpose) for purpose in purposes}
        assert len(seeds) == len(purposes)

    def test_no_collisions_across_grid(self) -> None:
        """All (case, replicate, purpose) streams are pairwise distinct."""
        scheme = SeedScheme(0)
        seen = set()
        for case_id in range(16):
            for replicate in range(2000):
                for purpose in ("test", "calibrate"):
                    seen.add(scheme.stream(case_id, replicate, purpose))
        assert len(seen) == 16 * 2000 * 2

    def test_generator_reproducible(self) -> None:
        """generator() re-yields the identical draw sequence."""
        scheme = SeedScheme(5)
        a = scheme.generator(1, 2, "test").normal(size=8)
        b = scheme.generator(1, 2, "test").normal(size=8)
        assert np.array_equal(a, b)


class TestSample:
    """Drawing values and the Sample container."""

    def test_reproducible_and_tagged(self) -> None:
        """Same (spec, n, seed) gives identical values with provenance."""
        spec = case_spec(7)
        a = sample(spec, 50, 123)
        b = sample(spec, 50, 123)
        assert np.array_equal(a.values, b.values)
        assert a.spec == spec
        assert a.seed == 123

    def test_values_read_only(self) -> None:
        """Sample values cannot be mutated in place."""
        x = sample(case_spec(15), 10, 0)
        with pytest.raises(ValueError):
            x.values[0] = 99.0

    def test_rejects_tiny_n(self) -> None:
        with pytest.raises(InsufficientDataError):
            sample(case_spec(15), 2, 0)

    def test_sample_rejects_nonfinite_container(self) -> None:
        with pytest.raises(InvalidArgumentError):
            Sample(np.array([1.0, np.nan, 2.0]))

    @pytest.mark.parametrize(
        "spec, scipy_dist",
        [
            (DistributionSpec("Normal", (1.0, 2.0)), scipy.stats.norm(1.0, 2.0)),
            (DistributionSpec("StudentT", (5.0,)), scipy.stats.t(5.0)),
            (DistributionSpec("Uniform", (-1.0, 3.0)), scipy.stats.uniform(-1.0, 4.0)),
            (DistributionSpec("Beta", (2.0, 6.0)), scipy.stats.beta(2.0, 6.0)),
            (DistributionSpec("Laplace", (0.0, 2.0)), scipy.stats.laplace(0.0, 2.0)),
            (DistributionSpec("Gamma", (4.0, 5.0)), scipy.stats.gamma(4.0, scale=0.2)),
            (DistributionSpec("ChiSquare", (4.0,)), scipy.stats.chi2(4.0)),
        ],
    )
    def test_draws_follow_the_law(self, spec: DistributionSpec, scipy_dist) -> None:
        """Empirical CDF of 1e5 draws sits within 0.01 of the true CDF."""
        x = sample(spec, 100_000, 2024)
        distance = scipy.stats.kstest(x.values, scipy_dist.cdf).statistic
        assert distance < 0.01, (spec.kind, distance)


class TestStandardizeAndMoments:
    """Location-scale normalization and moment summaries."""

    def test_standardize_unit_population_sd(self) -> None:
        """Output has mean 0 and population standard deviation 1."""
        x = sample(case_spec(13), 200, 9)
        z = standardize(x)
        assert float(z.values.mean()) == pytest.approx(0.0, abs=1e-12)
        assert float(z.values.std()) == pytest.approx(1.0, abs=1e-12)

    def test_standardize_rejects_constant(self) -> None:
        with pytest.raises(InsufficientDataError):
            standardize(np.full(10, 3.0))

    def test_moments_match_plain_formulas(self) -> None:
        """Moments agree with directly computed central moments."""
        values = np.array([1.0, 2.0, 2.0, 4.0, 7.0])
        mean, sd, skew, kurt = sample_moments(values)
        centered = values - values.mean()
        m2 = float(np.mean(centered**2))
        assert mean == pytest.approx(3.2)
        assert sd == pytest.approx(np.sqrt(m2))
        assert skew == pytest.approx(float(np.mean(centered**3)) / m2**1.5)
        assert kurt == pytest.approx(float(np.mean(centered**4)) / m2**2)

    def test_moments_of_symmetric_sample(self) -> None:
        """A mirror-symmetric sample has zero skewness."""
        values = np.array([-3.0, -1.0, 0.0, 1.0, 3.0])
        _, _, skew, _ = sample_moments(values)
        assert skew == pytest.approx(0.0, abs=1e-14)
