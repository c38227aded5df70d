"""Train the 784-256-10 MLP on MNIST with both learning rules.

Runs the same architecture twice, once with the two-pass rule and once with
backpropagation, and prints final test accuracy side by side.  Expects the
four MNIST IDX files (gzip or raw) in ./data or $TWOPASS_DATA_DIR; pass a
different location as the first argument.  Each run takes a few minutes.
"""

import sys

from twopass import Algorithm, DataError, ExperimentConfig, Task, run_experiment

EPOCHS = 30


def run(algorithm: Algorithm, data_dir: str | None) -> None:
    cfg = ExperimentConfig(
        task=Task.MNIST_MLP,
        algorithm=algorithm,
        learning_rate=0.01 if algorithm is Algorithm.TWO_PASS else 0.05,
        epochs=EPOCHS,
        batch_size=64,
        seed=0,
        hidden=256,
        data_dir=data_dir,
    )
    report = run_experiment(cfg)
    print(
        f"{algorithm.value:>9}: accuracy {report.final_accuracy:.4f}  "
        f"mse {report.final_mse:.5f}  ({report.wall_time_s:.0f}s)"
    )


def main() -> None:
    data_dir = sys.argv[1] if len(sys.argv) > 1 else None
    try:
        for algorithm in (Algorithm.TWO_PASS, Algorithm.BACKPROP):
            run(algorithm, data_dir)
    except DataError as exc:
        print(f"MNIST not found: {exc}", file=sys.stderr)
        print(
            "fetch the four IDX files (train/t10k images and labels) into ./data "
            "or set TWOPASS_DATA_DIR",
            file=sys.stderr,
        )
        sys.exit(2)


if __name__ == "__main__":
    main()
