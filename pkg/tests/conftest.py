import numpy as np
import pytest

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

from protonas.archspace import (
    HyperparamVector,
    SearchSpaceDef,
    TaskSpec,
    decode,
    load_templates,
    sample,
)
from protonas.archspace.graph import ArchitectureGraph, LayerSpec


@pytest.fixture(scope="session")
def templates():
    return load_templates()


@pytest.fixture
def space1d():
    return SearchSpaceDef(baseline_pool=("mbednet1d", "inceptiontime"))


@pytest.fixture
def task1d():
    return TaskSpec(input_shape=(3, 64), num_classes=5)


@pytest.fixture
def space2d():
    return SearchSpaceDef(baseline_pool=("mbednet", "mobilenetv2", "resnet", "squeezenet"))


@pytest.fixture
def task2d():
    return TaskSpec(input_shape=(3, 32, 32), num_classes=10)


@pytest.fixture
def vector1d():
    return HyperparamVector(
        architecture=0,
        group_depth=(1, 0, 1, 0),
        kernel_stride=(1, 0, 1, 3),
        width_multiplier=0.5,
        pruning_sparsity=(0.3, 0.3, 0.3, 0.3),
    )


@pytest.fixture
def graph1d(vector1d, space1d, task1d, templates):
    g = decode(vector1d, space1d, task1d, templates)
    g.infer_shapes()
    return g


def chain_graph(specs, input_shape, num_classes):
    """Linear graph from a list of LayerSpec; node i feeds node i+1."""
    preds = [[] if i == 0 else [i - 1] for i in range(len(specs))]
    g = ArchitectureGraph(
        nodes=list(specs), preds=preds, input_shape=input_shape, num_classes=num_classes
    )
    g.infer_shapes()
    return g


def tiny_classifier(in_shape=(2, 6, 6), classes=3, hidden=4):
    """conv-relu-gap-linear chain used across engine and cost tests."""
    c = in_shape[0]
    return chain_graph(
        [
            LayerSpec(kind="conv", in_channels=c, out_channels=hidden, kernel=3, stride=1,
                      padding=1, bias=True),
            LayerSpec(kind="relu"),
            LayerSpec(kind="global-avg-pool"),
            LayerSpec(kind="linear", in_channels=hidden, out_channels=classes, bias=True),
        ],
        in_shape,
        classes,
    )


def rng(seed=0):
    return np.random.default_rng(seed)
