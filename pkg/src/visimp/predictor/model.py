"""Toy fully convolutional importance predictor.

Fixed topology: four blocks of (3x3 conv, softplus, 2x average pool)
giving a total downsample of 16, a 1x1 conv head producing one logit
channel, an optional skip merge from the penultimate block (a finer
1/8-resolution refinement), and fixed bilinear upsampling back to the
input resolution. A sigmoid over the logits yields per-pixel importance
in (0,1).

Softplus and average pooling keep the network smooth everywhere, so
analytic gradients agree with central finite differences to first order
at every parameter — the property the gradient-check suite relies on.

Everything is float64 numpy; forward is pure and safe to call
concurrently on a loaded parameter set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import CheckpointError, DataError
from ..raster import BitmapImage, ImportanceMap, _interp_matrix

N_BLOCKS = 4
DOWNSAMPLE = 2**N_BLOCKS


@dataclass(frozen=True)
class Architecture:
    """Layer plan of the toy net; channel widths per block."""

    in_channels: int = 3
    channels: tuple[int, int, int, int] = (6, 8, 10, 12)
    skip_connections: bool = True

    def __post_init__(self):
        if len(self.channels) != N_BLOCKS or any(c < 1 for c in self.channels):
            raise DataError(f"channels must be {N_BLOCKS} positive widths")
        if self.in_channels < 1:
            raise DataError("in_channels must be positive")

    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        shapes: dict[str, tuple[int, ...]] = {}
        cin = self.in_channels
        for i, cout in enumerate(self.channels, start=1):
            shapes[f"conv{i}.weight"] = (3, 3, cin, cout)
            shapes[f"conv{i}.bias"] = (cout,)
            cin = cout
        shapes["head.weight"] = (1, 1, self.channels[-1], 1)
        shapes["head.bias"] = (1,)
        if self.skip_connections:
            shapes["skip.weight"] = (1, 1, self.channels[-2], 1)
            shapes["skip.bias"] = (1,)
        return shapes

    def to_dict(self) -> dict:
        return {
            "in_channels": self.in_channels,
            "channels": list(self.channels),
            "skip_connections": self.skip_connections,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "Architecture":
        try:
            return cls(
                in_channels=int(raw["in_channels"]),
                channels=tuple(int(c) for c in raw["channels"]),
                skip_connections=bool(raw["skip_connections"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CheckpointError(f"bad architecture descriptor: {exc}") from exc


def init_params(arch: Architecture, seed: int) -> dict[str, np.ndarray]:
    """Uniform fan-in init for trunk convs; head and skip start at zero,
    so a fresh net predicts sigmoid(0) = 0.5 everywhere."""
    rng = np.random.default_rng(seed)
    params: dict[str, np.ndarray] = {}
    for name, shape in arch.param_shapes().items():
        if name.endswith(".bias") or name.startswith(("head.", "skip.")):
            params[name] = np.zeros(shape, dtype=np.float64)
        else:
            fan_in = shape[0] * shape[1] * shape[2]
            bound = np.sqrt(3.0 / fan_in)
            params[name] = rng.uniform(-bound, bound, size=shape)
    return params


def param_count(params: dict[str, np.ndarray]) -> int:
    return sum(int(p.size) for p in params.values())


# ------------------------------------------------------------- primitives


def _softplus(x):
    return np.logaddexp(0.0, x)


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _conv3x3(x, w, b):
    # x (B,H,W,Cin), w (3,3,Cin,Cout); same-size zero-padded correlation
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1), (0, 0)))
    win = sliding_window_view(xp, (3, 3), axis=(1, 2))
    return np.einsum("bijcde,deco->bijo", win, w, optimize=True) + b


def _conv3x3_backward(x, w, d_out):
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1), (0, 0)))
    win = sliding_window_view(xp, (3, 3), axis=(1, 2))
    dw = np.einsum("bijcde,bijo->deco", win, d_out, optimize=True)
    db = d_out.sum(axis=(0, 1, 2))
    dp = np.pad(d_out, ((0, 0), (2, 2), (2, 2), (0, 0)))
    dwin = sliding_window_view(dp, (3, 3), axis=(1, 2))
    w_flip = w[::-1, ::-1]
    dx_full = np.einsum("bijode,deco->bijc", dwin, w_flip, optimize=True)
    return dx_full[:, 1:-1, 1:-1, :], dw, db


def _conv1x1(x, w, b):
    return x @ w[0, 0] + b


def _conv1x1_backward(x, w, d_out):
    dw = np.einsum("bijc,bijo->co", x, d_out, optimize=True)[None, None]
    db = d_out.sum(axis=(0, 1, 2))
    dx = d_out @ w[0, 0].T
    return dx, dw, db


def _avgpool2(x):
    b, h, w, c = x.shape
    return x.reshape(b, h // 2, 2, w // 2, 2, c).mean(axis=(2, 4))


def _avgpool2_backward(d_out):
    return np.repeat(np.repeat(d_out, 2, axis=1), 2, axis=2) / 4.0


def _resize_nhwc(x, out_h, out_w):
    ry = _interp_matrix(x.shape[1], out_h)
    rx = _interp_matrix(x.shape[2], out_w)
    return np.einsum("hH,bHWc,wW->bhwc", ry, x, rx, optimize=True)


def _resize_nhwc_backward(d_out, in_h, in_w):
    ry = _interp_matrix(in_h, d_out.shape[1])
    rx = _interp_matrix(in_w, d_out.shape[2])
    return np.einsum("hH,bhwc,wW->bHWc", ry, d_out, rx, optimize=True)


# ------------------------------------------------------------ forward/back


def forward_logits(
    params: dict[str, np.ndarray],
    arch: Architecture,
    x: np.ndarray,
    cache: dict | None = None,
) -> np.ndarray:
    """Logits (B,H,W) for a batch x (B,H,W,Cin), H and W divisible by 16.

    Pass a dict as `cache` to retain intermediates for backward().
    """
    b, h, w, cin = x.shape
    if h % DOWNSAMPLE or w % DOWNSAMPLE:
        raise DataError(f"spatial dims must be divisible by {DOWNSAMPLE}")
    if cin != arch.in_channels:
        raise CheckpointError(
            f"input has {cin} channels, architecture expects {arch.in_channels}"
        )
    keep = cache is not None
    acts = [x]
    pre = []
    a = x
    for i in range(1, N_BLOCKS + 1):
        z = _conv3x3(a, params[f"conv{i}.weight"], params[f"conv{i}.bias"])
        a = _avgpool2(_softplus(z))
        acts.append(a)
        if keep:
            pre.append(z)
    head = _conv1x1(acts[-1], params["head.weight"], params["head.bias"])
    if arch.skip_connections:
        skip = _conv1x1(acts[3], params["skip.weight"], params["skip.bias"])
        merged = _resize_nhwc(head, skip.shape[1], skip.shape[2]) + skip
    else:
        merged = head
    logits = _resize_nhwc(merged, h, w)[..., 0]
    if keep:
        cache.update(
            acts=acts, pre=pre, head_in=acts[-1], head=head, merged=merged
        )
        if arch.skip_connections:
            cache["skip_in"] = acts[3]
    return logits


def backward(
    params: dict[str, np.ndarray],
    arch: Architecture,
    cache: dict,
    d_logits: np.ndarray,
) -> dict[str, np.ndarray]:
    """Parameter gradients given d(loss)/d(logits) and a forward cache."""
    grads: dict[str, np.ndarray] = {}
    acts, pre = cache["acts"], cache["pre"]
    merged = cache["merged"]
    d_merged = _resize_nhwc_backward(
        d_logits[..., None], merged.shape[1], merged.shape[2]
    )
    if arch.skip_connections:
        d_skip = d_merged
        d_head = _resize_nhwc_backward(
            d_merged, cache["head"].shape[1], cache["head"].shape[2]
        )
        dx_skip, grads["skip.weight"], grads["skip.bias"] = _conv1x1_backward(
            cache["skip_in"], params["skip.weight"], d_skip
        )
    else:
        d_head = d_merged
        dx_skip = None
    d_a, grads["head.weight"], grads["head.bias"] = _conv1x1_backward(
        cache["head_in"], params["head.weight"], d_head
    )
    for i in range(N_BLOCKS, 0, -1):
        d_s = _avgpool2_backward(d_a)
        d_z = d_s * _sigmoid(pre[i - 1])  # softplus' = sigmoid
        d_a, dw, db = _conv3x3_backward(
            acts[i - 1], params[f"conv{i}.weight"], d_z
        )
        grads[f"conv{i}.weight"] = dw
        grads[f"conv{i}.bias"] = db
        if i - 1 == 3 and dx_skip is not None:
            d_a = d_a + dx_skip
    return grads


# -------------------------------------------------------------- inference


def image_to_input(image: BitmapImage) -> np.ndarray:
    """RGB samples scaled to [0,1]; alpha, if present, is dropped."""
    return image.data[:, :, :3].astype(np.float64) / 255.0


def pad_to_multiple(x: np.ndarray, multiple: int) -> np.ndarray:
    """Edge-replicate rows/columns so spatial dims divide `multiple`."""
    h, w = x.shape[0], x.shape[1]
    ph = (-h) % multiple
    pw = (-w) % multiple
    if ph == 0 and pw == 0:
        return x
    return np.pad(x, ((0, ph), (0, pw), (0, 0)), mode="edge")


def predict_map(
    params: dict[str, np.ndarray], arch: Architecture, image: BitmapImage
) -> ImportanceMap:
    """Bitmap in, importance map out: pad, forward, crop, sigmoid."""
    x = pad_to_multiple(image_to_input(image), DOWNSAMPLE)
    cache: dict = {}
    logits = forward_logits(params, arch, x[None], cache=cache)[0]
    logits = logits[: image.height, : image.width]
    p = _sigmoid(logits)
    return ImportanceMap(np.clip(p, 1e-12, 1.0 - 1e-12))
