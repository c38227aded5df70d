"""How much phase error can a realized network tolerate?

Every weight matrix lives on the chip as MZI phase settings, so fabrication
and thermal drift show up as Gaussian noise on each phase.  This script
trains the XOR network, realizes every layer as U Sigma V^H meshes, perturbs
all phases at increasing noise levels, and reports the loss of the perturbed
chip.  Phase noise keeps each mesh exactly unitary; only the implemented
matrix moves.
"""

import numpy as np

from twopass import (
    Activation,
    LayerSpec,
    PhotonicLayer,
    TrainConfig,
    activation_apply,
    apply_phase_noise,
    build_network,
    evaluate,
    realize_weight,
    sample_projection,
    train,
    xor_dataset,
)

SIGMAS = (0.0, 0.001, 0.003, 0.01, 0.03, 0.1, 0.3)
TRIALS = 20


def noisy_layers(net, sigma: float, seed: int) -> list[tuple[np.ndarray, Activation]]:
    """Realize each weight, jitter every phase, return dense equivalents."""
    out = []
    for i, layer in enumerate(net.layers):
        ideal = realize_weight(layer.weight)
        noisy = PhotonicLayer(
            mesh_v=apply_phase_noise(ideal.mesh_v, sigma, seed=seed * 1000 + 2 * i),
            sigma=ideal.sigma,
            mesh_u=apply_phase_noise(ideal.mesh_u, sigma, seed=seed * 1000 + 2 * i + 1),
            scale=ideal.scale,
        )
        out.append((noisy.realized_matrix, layer.activation))
    return out


def chip_mse(layers, data) -> float:
    x = data.inputs.T
    for mat, act in layers:
        x = activation_apply(act, (mat @ x).real)
    gamma = x - data.targets.T
    return float(np.mean(gamma * gamma))


def main() -> None:
    data = xor_dataset()
    net = build_network(
        (LayerSpec(2, 16, Activation.SQUARE), LayerSpec(16, 1, Activation.SQUARE)),
        seed=0,
    )
    proj = sample_projection(2, 1, seed=1)
    cfg = TrainConfig(learning_rate=0.1, epochs=240, batch_size=1, seed=2)
    net, _ = train(net, data, proj, cfg)
    clean_mse = evaluate(net, data).mse
    print(f"trained XOR, noise-free mse {clean_mse:.6f}")
    print(f"\n{'sigma_phase':>12}  {'mean mse':>10}  {'worst mse':>10}   ({TRIALS} draws)")

    for sigma in SIGMAS:
        mses = [chip_mse(noisy_layers(net, sigma, seed=t), data) for t in range(TRIALS)]
        print(f"{sigma:12.4f}  {np.mean(mses):10.6f}  {np.max(mses):10.6f}")


if __name__ == "__main__":
    main()
