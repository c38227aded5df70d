import os
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent

MNIST_FILES = (
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
)


def mnist_data_dir() -> Path:
    env = os.environ.get("TWOPASS_DATA_DIR")
    return Path(env) if env else REPO_ROOT / "data"


def mnist_available() -> bool:
    d = mnist_data_dir()
    return all((d / n).exists() or (d / f"{n}.gz").exists() for n in MNIST_FILES)


@pytest.fixture(scope="session")
def mnist_dir() -> Path:
    """Directory with the four MNIST IDX files; skips when absent."""
    d = mnist_data_dir()
    if not mnist_available():
        pytest.skip(
            f"MNIST IDX files not found under {d}. Download "
            "train-images-idx3-ubyte, train-labels-idx1-ubyte, "
            "t10k-images-idx3-ubyte, t10k-labels-idx1-ubyte (optionally .gz) "
            "into that directory, or point TWOPASS_DATA_DIR at them."
        )
    return d


@pytest.fixture(scope="session")
def mnist_data(mnist_dir):
    from twopass import load_mnist

    return load_mnist(mnist_dir)
