import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from quadevo.params import (
    BOUNDS,
    GENE_NAMES,
    LOWER,
    N_GENES,
    UPPER,
    GaitSpec,
    GenomeError,
    PhenotypeError,
    check_genome,
    decode,
    encode,
    format_genome,
    validate,
)

unit_genomes = arrays(np.float64, N_GENES, elements=st.floats(0.0, 1.0))


def test_eighteen_genes_in_frozen_order():
    assert N_GENES == 18
    assert GENE_NAMES[0] == "ground_front_cranial"
    assert GENE_NAMES[-2:] == ("femur_extension", "tibia_extension")
    assert len(set(GENE_NAMES)) == 18


def test_zero_genome_decodes_to_lower_bounds():
    spec = decode(np.zeros(N_GENES))
    assert spec.gait.frequency == 0.25
    assert spec.morphology.femur_extension == 0.0
    assert spec.morphology.tibia_extension == 0.0
    assert spec.spline.ground_back_cranial == -150.0
    np.testing.assert_array_equal(spec.as_vector(), LOWER)


def test_half_genome_decodes_to_midpoints():
    spec = decode(np.full(N_GENES, 0.5))
    assert spec.morphology.tibia_extension == 50.0
    assert spec.gait.lift_duration == pytest.approx(0.165, abs=1e-15)
    np.testing.assert_allclose(spec.as_vector(), (LOWER + UPPER) / 2, rtol=0, atol=1e-12)


def test_documented_ranges():
    assert BOUNDS["frequency"] == (0.25, 1.0)
    assert BOUNDS["lift_duration"] == (0.13, 0.20)
    assert BOUNDS["wag_amp_lateral"] == (0.0, 14.0)
    assert BOUNDS["tibia_extension"] == (0.0, 100.0)
    assert BOUNDS["femur_extension"] == (0.0, 50.0)
    lo, hi = BOUNDS["wag_phase"]
    assert lo == -hi and hi == pytest.approx(math.pi / 8)


@pytest.mark.parametrize("bad", [np.zeros(17), np.zeros(19), np.zeros((2, 18))])
def test_wrong_length_rejected(bad):
    with pytest.raises(GenomeError):
        check_genome(bad)


def test_out_of_range_gene_reports_index():
    g = np.full(N_GENES, 0.5)
    g[7] = 1.2
    with pytest.raises(GenomeError) as info:
        decode(g)
    assert info.value.index == 7
    g[7] = float("nan")
    with pytest.raises(GenomeError):
        decode(g)


@given(unit_genomes)
def test_encode_decode_roundtrip(g):
    np.testing.assert_allclose(encode(decode(g)), g, rtol=0, atol=1e-12)


def test_decode_encode_roundtrip_fuzz(rng):
    for _ in range(10_000):
        phen = LOWER + rng.random(N_GENES) * (UPPER - LOWER)
        spec = GaitSpec.from_vector(phen)
        np.testing.assert_allclose(decode(encode(spec)).as_vector(), phen, rtol=0, atol=1e-9)


def test_lower_bound_spec_encodes_to_zero():
    np.testing.assert_array_equal(encode(GaitSpec.from_vector(LOWER)), np.zeros(N_GENES))


def test_tibia_maximum_encodes_to_one():
    v = (LOWER + UPPER) / 2
    v[GENE_NAMES.index("tibia_extension")] = 100.0
    assert encode(GaitSpec.from_vector(v))[-1] == 1.0


def test_validate_midpoint_is_clean():
    assert validate(decode(np.full(N_GENES, 0.5))) == []


def test_validate_reports_frequency():
    v = (LOWER + UPPER) / 2
    v[GENE_NAMES.index("frequency")] = 1.5
    problems = validate(GaitSpec.from_vector(v))
    assert len(problems) == 1
    p = problems[0]
    assert (p.field, p.value, p.lo, p.hi) == ("frequency", 1.5, 0.25, 1.0)
    assert "frequency" in str(p) and "[0.25, 1.0]" in str(p)


def test_validate_lists_several_violations_in_genome_order():
    v = (LOWER + UPPER) / 2
    v[GENE_NAMES.index("tibia_extension")] = -1.0
    v[GENE_NAMES.index("air_top_dorsal")] = 99.0
    problems = validate(GaitSpec.from_vector(v))
    assert [p.field for p in problems] == ["air_top_dorsal", "tibia_extension"]
    with pytest.raises(PhenotypeError):
        encode(GaitSpec.from_vector(v))


@given(unit_genomes)
def test_format_genome_is_lossless(g):
    assert np.array_equal(np.array([float(s) for s in format_genome(g)]), g)
