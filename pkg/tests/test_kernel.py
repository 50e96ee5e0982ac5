import random

import numpy as np
import pytest

from stabctx import _kernel_py, kernel
from stabctx.born import JointOutcome, outcome_possibility
from stabctx.phase_space import enumerate_contexts
from stabctx.states import PhaseFunctionState
from stabctx.zmod import Modulus, ZdPoly

try:
    from stabctx import _kernel
except ImportError:
    _kernel = None


def random_instance(rng, d):
    m = Modulus(d)
    coeffs = {(rng.randrange(4), rng.randrange(4)): rng.randrange(d)
              for _ in range(5)}
    st = PhaseFunctionState(m, 2, ZdPoly(m, 2, coeffs))
    contexts = enumerate_contexts(m, 2)
    ctx = contexts[rng.randrange(len(contexts))]
    a, b = rng.randrange(d), rng.randrange(d)
    return st, ctx, a, b


def test_backend_reported():
    assert kernel.BACKEND in ("compiled", "python")


@pytest.mark.skipif(_kernel is None, reason="compiled kernel not built")
def test_backends_agree():
    rng = random.Random(0)
    for d in (3, 5, 7):
        for _ in range(30):
            st, ctx, a, b = random_instance(rng, d)
            tab = kernel.coerce_table(st.phi_table())
            b1, b2 = ctx.canonical_basis
            u = kernel.coerce_point(b1.coords)
            v = kernel.coerce_point(b2.coords)
            got_c = _kernel.first_possible_ket(d, tab, u, v, a, b)
            got_py = _kernel_py.first_possible_ket(d, tab, u, v, a, b)
            assert got_c == got_py


def test_kernel_matches_projector_route():
    rng = random.Random(1)
    for d in (3, 5):
        for _ in range(40):
            st, ctx, a, b = random_instance(rng, d)
            ket = kernel.first_possible_ket(
                d, st.phi_table(),
                ctx.canonical_basis[0].coords, ctx.canonical_basis[1].coords,
                a, b)
            res = outcome_possibility(st, JointOutcome(ctx, (a, b)))
            assert (ket >= 0) == res.possible
            if ket >= 0:
                # the named ket is indeed the first non-vanishing one
                for idx, rm in enumerate(res.per_ket):
                    if idx < ket:
                        assert rm.is_zero_sum()
                    elif idx == ket:
                        assert not rm.is_zero_sum()
                        break


def test_kernel_rejects_huge_d():
    if _kernel is None:
        pytest.skip("compiled kernel not built")
    with pytest.raises(ValueError):
        _kernel.first_possible_ket(
            67, np.zeros((67, 67), dtype=np.intc),
            np.zeros(4, dtype=np.intc), np.zeros(4, dtype=np.intc), 0, 0)
