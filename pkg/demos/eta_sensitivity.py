"""How much does the proximal weight eta actually matter?

Sweeps eta over four decades on an easy blobs task. Train accuracy
stays near perfect across the whole grid because the dual line search
absorbs badly scaled steps.
"""

from proxfw.bench import RunConfig, sensitivity_sweep
from proxfw.data import generate_synthetic

data = generate_synthetic("blobs", 1000, 200, 200, d=10, num_classes=5, noise=0.25, seed=0)
base = RunConfig(
    dataset=data, optimizer="dfw", epochs=40, batch_size=32,
    hidden_dims=(32,), seed=0,
)

rows = sensitivity_sweep(base, (1e-3, 1e-2, 1e-1, 1.0))
print("eta      best val acc  final train acc  status")
for r in rows:
    print(f"{r.eta:<8g} {r.best_val_acc:12.4f}  {r.final_train_acc:15.4f}  {r.status}")
