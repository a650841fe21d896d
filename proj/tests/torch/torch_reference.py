"""Compares engine features and logits with torchvision on shared random weights.

Exits 77 when torch or torchvision is unavailable.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

try:
    import numpy as np
    import torch
    import torchvision
except ImportError as exc:
    print(f"skipping: {exc}")
    sys.exit(77)

EXTRACTION = {
    "alexnet": ["features.1", "features.4", "features.7", "features.9", "features.11"],
    "squeezenet": ["features.1", "features.4", "features.7", "features.9", "features.10", "features.11", "features.12"],
    "vgg16": ["features.3", "features.8", "features.15", "features.22", "features.29"],
    "resnet18": ["conv1", "maxpool", "layer2", "layer3", "layer4"],
    "resnet50": ["conv1", "maxpool", "layer2", "layer3", "layer4"],
}

BUILDERS = {
    "alexnet": torchvision.models.alexnet,
    "squeezenet": torchvision.models.squeezenet1_1,
    "vgg16": torchvision.models.vgg16,
    "resnet18": torchvision.models.resnet18,
    "resnet50": torchvision.models.resnet50,
}

REL_TOL = 1e-4


def load_archive(path: Path) -> dict:
    manifest = json.loads((path / "manifest.json").read_text())
    blob = (path / "data.bin").read_bytes()
    tensors = {}
    for e in manifest["entries"]:
        arr = np.frombuffer(blob, dtype="<f4", count=e["nbytes"] // 4, offset=e["offset"])
        tensors[e["name"]] = torch.from_numpy(arr.reshape(e["shape"]).copy())
    return tensors


def rel_error(got: np.ndarray, want: np.ndarray) -> float:
    return float(np.abs(got - want).max() / max(np.abs(want).max(), 1e-12))


def check(dump: Path, arch: str, seed: int, size: int, workdir: Path) -> bool:
    out = workdir / f"{arch}-{size}"
    subprocess.run([str(dump), arch, str(seed), str(size), str(out)], check=True)
    meta = json.loads((out / "features.json").read_text())

    model = BUILDERS[arch](weights=None).eval()
    state = load_archive(out / "archive")
    missing, unexpected = model.load_state_dict(state, strict=False)
    missing = [k for k in missing if not k.endswith("num_batches_tracked")]
    if missing or unexpected:
        print(f"{arch}: missing {missing[:5]} unexpected {unexpected[:5]}")
        return False

    captured = {}
    modules = dict(model.named_modules())
    for name in EXTRACTION[arch]:
        modules[name].register_forward_hook(lambda _m, _i, o, name=name: captured.__setitem__(name, o.detach().clone()))

    x = torch.from_numpy(np.fromfile(out / "input.bin", dtype="<f4").reshape(1, 3, size, size))
    with torch.no_grad():
        logits = model(x)[0].numpy()

    ok = True
    for i, name in enumerate(EXTRACTION[arch]):
        want = captured[name][0].numpy()
        got = np.fromfile(out / f"layer{i}.bin", dtype="<f4")
        if list(want.shape) != meta["layers"][i]:
            print(f"{arch} {name}: shape {meta['layers'][i]} vs reference {list(want.shape)}")
            ok = False
            continue
        err = rel_error(got.reshape(want.shape), want)
        ok = ok and err <= REL_TOL
        print(f"{arch} {name} {list(want.shape)}: rel err {err:.2e}")
    err = rel_error(np.fromfile(out / "logits.bin", dtype="<f4"), logits)
    ok = ok and err <= REL_TOL
    print(f"{arch} logits: rel err {err:.2e}")
    return ok


def main() -> int:
    dump = Path(sys.argv[1])
    archs = sys.argv[2:] or list(EXTRACTION)
    torch.set_num_threads(1)
    ok = True
    with tempfile.TemporaryDirectory() as tmp:
        for arch in archs:
            for size in (64, 224) if arch == "squeezenet" else (64,):
                ok = check(dump, arch, 3, size, Path(tmp)) and ok
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
