"""Race the proximal Frank-Wolfe trainer against SGD and Adam.

Same data, same seed, same batch order. The first optimizer needs no
hand-tuned decay: its step size comes out of the dual line search.
"""

from proxfw.bench import RunConfig, run_training
from proxfw.data import generate_synthetic

data = generate_synthetic("blobs", 2000, 400, 400, d=10, num_classes=5, noise=0.5, seed=0)

results = {}
for opt, eta, loss in (("dfw", 0.1, "svm"), ("sgd", 0.1, "svm"), ("adam", 0.001, "ce")):
    config = RunConfig(
        dataset=data, optimizer=opt, eta=eta, loss=loss,
        epochs=15, batch_size=32, hidden_dims=(32,), seed=0,
    )
    results[opt] = run_training(config).metrics

print("epoch  " + "  ".join(f"{opt:>14}" for opt in results))
for e in range(0, 15, 2):
    row = "  ".join(
        f"tr {m[e].train_acc:.3f} va {m[e].val_acc:.3f}" for m in results.values()
    )
    print(f"{e:5d}  {row}")

gammas = [m.mean_gamma for m in results["dfw"]]
print(f"\nmean step size per epoch (dfw): first {gammas[0]:.3f}, last {gammas[-1]:.3f}")
