import numpy as np
import pytest

from nero.data import Instance, RelationSchema, NONE_RELATION
from nero.synthetic import generate


@pytest.fixture(scope="session")
def schema():
    return RelationSchema(("org:founded_by", "per:spouse_of", NONE_RELATION))


@pytest.fixture
def founded_instance():
    return Instance(
        id="ex1",
        tokens=("Bill", "Gates", "founded", "Microsoft", "."),
        subj_span=(0, 1),
        obj_span=(3, 3),
        subj_type="PERSON",
        obj_type="ORGANIZATION",
        gold_relation="org:founded_by",
    )


@pytest.fixture(scope="session")
def synth():
    return generate(n_train=200, n_dev=60, n_test=60, seed=7)


@pytest.fixture(scope="session")
def synth_vocab(synth):
    return synth.vocabulary(seed=0)


def finite_difference(fn, params, rng, samples_per_param=3, eps=1e-5):
    """Max relative error between analytic grads and central differences.

    `fn` rebuilds the scalar loss from current parameter values. Entries
    where both gradients are below 1e-6 are skipped: central differences
    at this eps carry absolute noise near 1e-7, swamping such entries.
    """
    loss = fn()
    for p in params.values():
        p.zero_grad()
    loss.backward()
    worst = 0.0
    for p in params.values():
        flat = p.values.reshape(-1)
        gflat = p.grad.reshape(-1)
        for _ in range(samples_per_param):
            i = int(rng.integers(flat.size))
            old = flat[i]
            flat[i] = old + eps
            lp = fn().item()
            flat[i] = old - eps
            lm = fn().item()
            flat[i] = old
            fd = (lp - lm) / (2 * eps)
            an = gflat[i]
            denom = max(abs(fd), abs(an))
            if denom < 1e-6:
                continue
            worst = max(worst, abs(fd - an) / denom)
    return worst
