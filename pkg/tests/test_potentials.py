import numpy as np
import pytest

from semiscat import Potential, TimeFamily
from semiscat.potentials import (smooth_barrier, square_barrier,
                                 validate_potential, validate_time_family)


def test_square_barrier_support_and_values():
    pot = square_barrier(0.0, 1.0, 2.0)
    x = np.array([-1.0, -1e-12, 0.5, 1.0 - 1e-12, 1.0 + 1e-12, 4.0])
    v = pot(x)
    assert v[0] == 0.0 and v[-1] == 0.0
    assert v[2] == 2.0
    assert pot.is_constant
    assert pot.c_lower == 2.0 and pot.v_sup == 2.0


def test_profiles_bounded_and_vanishing_at_interfaces():
    for profile in ("sin2", "well4"):
        pot = Potential(a=0.0, b=1.0, v0=2.0, bump=0.7, profile=profile)
        t = np.linspace(1e-9, 1 - 1e-9, 2001)
        shape = (pot.inside(t) - 2.0) / 0.7
        assert shape.min() > -1e-12 and shape.max() <= 1.0 + 1e-12
        assert np.isclose(shape.max(), 1.0, atol=1e-6)  # sup of profile is 1
        assert abs(shape[0]) < 1e-12 and abs(shape[-1]) < 1e-12
        assert not pot.is_constant
        assert pot.v_sup == 2.7 and pot.c_lower == 2.0


def test_negative_bump_lowers_the_floor():
    pot = Potential(a=0.0, b=1.0, v0=2.0, bump=-0.5, profile="sin2")
    assert pot.c_lower == 1.5
    assert pot.v_sup == 2.0


def test_unknown_profile_rejected():
    with pytest.raises(ValueError):
        Potential(a=0.0, b=1.0, v0=2.0, profile="cubic")
    with pytest.raises(ValueError):
        Potential(a=1.0, b=0.0, v0=2.0)


def test_validate_potential():
    validate_potential(square_barrier(), 2.0)
    validate_potential(smooth_barrier(0.0, 1.0, 2.0, 0.5), 2.0)
    with pytest.raises(ValueError):
        validate_potential(square_barrier(), 2.5)  # demanded bound too high
    with pytest.raises(ValueError):
        validate_potential(Potential(a=0.0, b=1.0, v0=1.0, bump=-1.5,
                                     profile="sin2"), 0.5)
    with pytest.raises(ValueError):
        validate_potential(square_barrier(), -1.0)


def test_time_family_schedules():
    base = square_barrier()
    lin = TimeFamily(base=base, amp=0.4, horizon=4.0, schedule="linear")
    assert lin.amplitude(0.0) == 0.0
    assert np.isclose(lin.amplitude(2.0), 0.2)
    assert np.isclose(lin.amplitude(4.0), 0.4)
    assert lin.amplitude(7.0) == 0.4  # clamped beyond the horizon
    assert np.isclose(lin.lipschitz(), 0.1)

    s2 = TimeFamily(base=base, amp=0.4, horizon=4.0, schedule="sin2")
    assert np.isclose(s2.amplitude(2.0), 0.4)
    assert abs(s2.amplitude(4.0)) < 1e-15
    assert np.isclose(s2.lipschitz(), 0.1 * np.pi)

    cst = TimeFamily(base=base, amp=0.4, horizon=4.0, schedule="const")
    assert cst.amplitude(0.0) == 0.4 and cst.lipschitz() == 0.0


def test_time_family_frozen_and_steps():
    fam = TimeFamily(base=square_barrier(), amp=0.4, horizon=4.0)
    pot2 = fam.frozen(2.0)
    assert pot2.profile == "well4"
    assert np.isclose(pot2.bump, 0.2)
    assert np.isclose(fam.sup_step(1.0, 3.0), 0.2)
    # linear schedule: total variation equals the net amplitude change
    assert np.isclose(fam.variation(0.0, 4.0), 0.4, rtol=1e-12)


def test_time_family_validation():
    base = square_barrier()
    with pytest.raises(ValueError):
        TimeFamily(base=base, amp=0.4, horizon=4.0, schedule="ramp")
    with pytest.raises(ValueError):
        TimeFamily(base=base, amp=0.4, horizon=-1.0)
    bumpy = Potential(a=0.0, b=1.0, v0=2.0, bump=0.3, profile="sin2")
    with pytest.raises(ValueError):
        TimeFamily(base=bumpy, amp=0.4, horizon=4.0)
    # the increment profile vanishes to second order at the interfaces
    validate_time_family(TimeFamily(base=base, amp=0.4, horizon=4.0))
    with pytest.raises(ValueError):
        validate_time_family(TimeFamily(base=base, amp=-3.0, horizon=4.0))
