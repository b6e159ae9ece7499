import pytest

from spillover_lab.core import BinaryBelief, Tag
from spillover_lab.election import ElectionConfig, PartyUtility, VoterGroup


def make_election(nu_sp=0.7, nu_sc=0.3, phi=3.0, pi0=0.4, pi1=0.9, chi=0.3, share=0.5, gamma=0.5, x_sp=1.0, x_sc=0.0):
    return ElectionConfig(
        VoterGroup(Tag.SP, x_sp, share, BinaryBelief(nu_sp)),
        VoterGroup(Tag.SC, x_sc, 1 - share, BinaryBelief(nu_sc)),
        phi,
        BinaryBelief(0.5),
        BinaryBelief(pi0),
        BinaryBelief(pi1),
        {Tag.SP: chi, Tag.SC: chi},
        PartyUtility.power(gamma),
    )


@pytest.fixture
def worked_election():
    return make_election()
