"""Shared fixtures: the standard indoor-user link used across the suite.

Geometry: transmitter 300 m from the surface, receiver 10 m, both on the
boresight axis unless a test moves them. Budget: 10 W transmit, 0.1 W relay,
20 MHz, 10 dB noise figure, 10 dBi transmit gain, -20 dB penetration loss.
"""

import pytest

from rislink import CarrierSpec, LinkBudget, Placement


@pytest.fixture
def carrier():
    return CarrierSpec.from_wavelength(0.1)


@pytest.fixture
def budget():
    return LinkBudget(
        tx_power_w=10.0,
        relay_tx_power_w=0.1,
        bandwidth_hz=2e7,
        noise_figure_db=10.0,
        tx_gain_dbi=10.0,
        rx_gain_dbi=0.0,
        relay_gain_dbi=0.0,
        penetration_loss_db=-20.0,
    )


@pytest.fixture
def boresight():
    return Placement(
        tx_position=[0.0, 0.0, 300.0],
        rx_position=[0.0, 0.0, 10.0],
        surface_center=[0.0, 0.0, 0.0],
        surface_normal=[0.0, 0.0, 1.0],
        surface_x_axis=[1.0, 0.0, 0.0],
    )
