import random

import pytest
from hypothesis import HealthCheck, assume, settings

from bocslab.ainfty import AInfAlgHomotopy, AInfAlgMorphism, homotopic_morphism
from bocslab.errors import GenerationFailed
from bocslab.oracles import GenSpec, gen_dg_algebra, gen_mc, gen_module, random_hom

settings.register_profile("bocslab", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])
settings.load_profile("bocslab")

seeds = dict(min_value=0, max_value=10**6)


def algebra(seed, max_dim=4, with_m3=True, **kw):
    """Seeded A∞-algebra; a seed the generator cannot serve is skipped via assume."""
    try:
        return gen_dg_algebra(GenSpec(seed=seed, n_idem=1 + seed % 2, max_dim=max_dim, with_m3=with_m3, **kw))
    except GenerationFailed:
        assume(False)


def twisted_pair(B, rng, dims=(3, 2)):
    try:
        return [gen_mc(B, gen_module(rng, B.base, d, prefix=p), rng) for d, p in zip(dims, "mnp")]
    except GenerationFailed:
        assume(False)


def random_alg_homotopy(rng, A, upto, density=0.5):
    return AInfAlgHomotopy(A, A, {n: random_hom(rng, A.power(n), A.A, -n, density) for n in range(1, upto + 1)}, upto)


def random_alg_morphism(rng, A, L):
    """A∞-endomorphism of A homotopic to the identity, valid through arity L."""
    return homotopic_morphism(AInfAlgMorphism.identity(A), random_alg_homotopy(rng, A, 2), L)


def ok_upto(res, n):
    return all(ok for i, ok, _ in res.items if i <= n)


@pytest.fixture
def rng():
    return random.Random(12345)
