"""Minimax random-code capacity search for cq channel families."""

import math

import numpy as np
import pytest

from avqclab import (
    AvCqc,
    BudgetExceeded,
    CqChannel,
    ValidationError,
    basis_state,
    check_symmetrizable_cq,
    chi_of_mixture,
    cq_random_capacity,
    holevo_chi,
    maximally_mixed,
    simplex_grid,
)

from helpers import random_density, rng_for


def binary_entropy(x):
    if x in (0.0, 1.0):
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def orthogonal_branch():
    return CqChannel(
        (0, 1),
        {0: basis_state(2, 0).to_density(), 1: basis_state(2, 1).to_density()},
    )


def swapped_branch():
    return CqChannel(
        (0, 1),
        {0: basis_state(2, 1).to_density(), 1: basis_state(2, 0).to_density()},
    )


def constant_branch(rho):
    return CqChannel((0, 1), {0: rho, 1: rho})


def random_branch(rng, dim=2, letters=(0, 1)):
    return CqChannel(letters, {z: random_density(rng, dim) for z in letters})


class TestSimplexGrid:
    def test_binary_count_and_values(self):
        pts = list(simplex_grid(2, 4))
        assert len(pts) == 5
        assert sorted(p[0] for p in pts) == [0.0, 0.25, 0.5, 0.75, 1.0]

    def test_ternary_count(self):
        pts = list(simplex_grid(3, 4))
        assert len(pts) == math.comb(6, 2)
        for p in pts:
            assert p.sum() == pytest.approx(1.0, abs=1e-12)
            assert np.all(p >= 0)

    def test_rejects_degenerate_arguments(self):
        with pytest.raises(ValidationError):
            list(simplex_grid(0, 4))
        with pytest.raises(ValidationError):
            list(simplex_grid(2, 0))


class TestChiOfMixture:
    def test_point_mass_matches_single_channel(self):
        rng = rng_for(70)
        branch = random_branch(rng)
        avcqc = AvCqc((0, 1), {0: branch, 1: random_branch(rng)})
        p = np.array([0.3, 0.7])
        assert chi_of_mixture(avcqc, p, [1.0, 0.0]) == pytest.approx(
            holevo_chi(p, branch), abs=1e-12
        )

    def test_constant_mixture_is_zero(self):
        rng = rng_for(71)
        avcqc = AvCqc(
            (0, 1),
            {
                0: constant_branch(random_density(rng, 2)),
                1: constant_branch(random_density(rng, 2)),
            },
        )
        assert chi_of_mixture(avcqc, [0.5, 0.5], [0.4, 0.6]) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_swap_pair_closed_form(self):
        avcqc = AvCqc((0, 1), {0: orthogonal_branch(), 1: swapped_branch()})
        value = chi_of_mixture(avcqc, [0.5, 0.5], [0.75, 0.25])
        assert value == pytest.approx(1.0 - binary_entropy(0.25), abs=1e-4)

    def test_length_mismatch(self):
        avcqc = AvCqc((0, 1), {0: orthogonal_branch(), 1: swapped_branch()})
        with pytest.raises(Exception):
            chi_of_mixture(avcqc, [0.5, 0.5], [1.0])


class TestCapacityAnchors:
    def test_family_with_constant_member_has_zero_capacity(self):
        rng = rng_for(72)
        avcqc = AvCqc(
            (0, 1),
            {0: random_branch(rng), 1: constant_branch(maximally_mixed(2))},
        )
        result = cq_random_capacity(avcqc, grid_step=1.0 / 64.0)
        assert result.value == pytest.approx(0.0, abs=1e-6)

    def test_singleton_orthogonal_outputs(self):
        avcqc = AvCqc((0,), {0: orthogonal_branch()})
        result = cq_random_capacity(avcqc, grid_step=1.0 / 64.0)
        assert result.value == pytest.approx(1.0, abs=1e-4)
        assert np.allclose(result.argmax_p, [0.5, 0.5], atol=1e-3)

    def test_swap_pair_zero(self):
        avcqc = AvCqc((0, 1), {0: orthogonal_branch(), 1: swapped_branch()})
        result = cq_random_capacity(avcqc, grid_step=1.0 / 64.0)
        assert result.value == pytest.approx(0.0, abs=1e-6)


class TestCapacityProperties:
    def test_result_fields_sane(self):
        rng = rng_for(73)
        avcqc = AvCqc((0, 1), {0: random_branch(rng), 1: random_branch(rng)})
        result = cq_random_capacity(avcqc, grid_step=1.0 / 16.0)
        assert result.value >= 0.0
        assert result.certified_gap >= 0.0
        assert result.grid_step == pytest.approx(1.0 / 16.0)
        assert result.argmax_p.sum() == pytest.approx(1.0, abs=1e-9)
        assert result.argmin_q.sum() == pytest.approx(1.0, abs=1e-9)

    def test_singleton_matches_direct_maximization(self):
        rng = rng_for(74)
        for _ in range(3):
            branch = random_branch(rng)
            avcqc = AvCqc((0,), {0: branch})
            result = cq_random_capacity(avcqc, grid_step=1.0 / 32.0)
            direct = max(
                holevo_chi(p, branch) for p in simplex_grid(2, 256)
            )
            assert abs(result.value - direct) <= result.certified_gap + 1e-9

    def test_monotone_under_family_growth(self):
        rng = rng_for(75)
        for _ in range(3):
            b0, b1 = random_branch(rng), random_branch(rng)
            small = cq_random_capacity(
                AvCqc((0,), {0: b0}), grid_step=1.0 / 16.0
            )
            large = cq_random_capacity(
                AvCqc((0, 1), {0: b0, 1: b1}), grid_step=1.0 / 16.0
            )
            # adding a channel shrinks nothing but the inf's feasible hull
            assert large.value <= small.value + 1e-6

    def test_half_step_consistency(self):
        rng = rng_for(76)
        avcqc = AvCqc((0, 1), {0: random_branch(rng), 1: random_branch(rng)})
        coarse = cq_random_capacity(avcqc, grid_step=1.0 / 16.0)
        fine = cq_random_capacity(avcqc, grid_step=1.0 / 32.0)
        assert abs(coarse.value - fine.value) <= coarse.certified_gap + 1e-9

    def test_symmetrizable_swap_pair_consistency(self):
        avcqc = AvCqc((0, 1), {0: orthogonal_branch(), 1: swapped_branch()})
        verdict = check_symmetrizable_cq(avcqc)
        result = cq_random_capacity(avcqc, grid_step=1.0 / 16.0)
        assert verdict.feasible
        assert result.value <= result.certified_gap + 1e-9

    def test_grid_step_validation(self):
        avcqc = AvCqc((0,), {0: orthogonal_branch()})
        with pytest.raises(ValidationError):
            cq_random_capacity(avcqc, grid_step=0.9)
        with pytest.raises(ValidationError):
            cq_random_capacity(avcqc, grid_step=0.0)

    def test_budget_guard(self):
        avcqc = AvCqc((0, 1), {0: orthogonal_branch(), 1: swapped_branch()})
        with pytest.raises(BudgetExceeded):
            cq_random_capacity(avcqc, grid_step=1.0 / 64.0, budget=100)
