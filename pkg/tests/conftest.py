import numpy as np

from slprobust.channel import UncertaintyModel, realize
from slprobust.constellation import mpsk
from slprobust.dpcir import CirDescriptor, Psi, dpcir_for, psi
from slprobust.precoders import ScenarioInputs


def identity_scenario(psi_value, model=None, epsilon=0.01):
    """Single user, single antenna, identity channel, axis-aligned region."""
    d = CirDescriptor(A=np.eye(2), b=np.asarray(psi_value, float), c=np.zeros(2), symbol=0)
    p = Psi(value=np.asarray(psi_value, float), sigma=1.0, gamma=1.0)
    return ScenarioInputs(
        estimates=np.eye(2)[None, :, :],
        descriptors=[d],
        psis=[p],
        model=model or UncertaintyModel.none(),
        epsilon=epsilon,
    )


def psk_identity_scenario(order, symbol, gamma, model=None, epsilon=0.01, sigma=1.0):
    """Single user, single antenna, identity channel, real PSK region."""
    d = dpcir_for(mpsk(order), symbol)
    return ScenarioInputs(
        estimates=np.eye(2)[None, :, :],
        descriptors=[d],
        psis=[psi(d, sigma, gamma)],
        model=model or UncertaintyModel.none(),
        epsilon=epsilon,
    )


def random_scenario(rng, n_tx=4, n_users=4, order=4, gamma=10.0, sigma=1.0,
                    model=None, epsilon=0.01, use_true=False):
    """Random multiuser slot with drawn channels and symbols."""
    model = model or UncertaintyModel.none()
    real = realize(n_tx, n_users, model, rng)
    const = mpsk(order)
    symbols = rng.integers(0, order, n_users)
    descs = [dpcir_for(const, int(m)) for m in symbols]
    lifts = real.true_lifts if use_true else real.estimate_lifts
    return ScenarioInputs(
        estimates=lifts,
        descriptors=descs,
        psis=[psi(d, sigma, gamma) for d in descs],
        model=model,
        epsilon=epsilon,
    ), real, symbols
