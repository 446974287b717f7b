import numpy as np
import pytest

from delcodec import formats


def make(generator, width=256, height=256, **kw):
    return formats.synthesize(formats.SyntheticSpec(
        generator=generator, width=width, height=height, **kw))


@pytest.fixture(scope="session")
def corpus():
    """The six named synthetic images at 256x256, 8-bit."""
    return {
        "constant": make("constant", value=137),
        "wedge": make("wedge-horizontal"),
        "checkerboard": make("checkerboard"),
        "stripes": make("stripes", period=8),
        "uniform-noise": make("uniform-noise", seed=1),
        "lowpass-noise": make("lowpass-noise", seed=2, radius=4),
    }


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS):
            terminalreporter.write_line(line)
