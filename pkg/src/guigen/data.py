"""Synthetic GUI corpus: wireframes, low-fi renders, captions, manifests.

Everything here is a pure function of explicit integer seeds, so datasets are
bit-reproducible.  Geometry is normalized to [0,1]^2 (x = left->right,
y = top->bottom); images are float32 HxWx3 in [-1,1].
"""

from __future__ import annotations

import dataclasses
import io
import json
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .config import OracleConfig
from .scanpath import predict_scanpath_np

SCHEMA_VERSION = 1

# Distinct rng stream tags so per-record substreams never collide.
_S_DEVICE, _S_WIREFRAME, _S_THEME, _S_STYLE = 101, 102, 103, 104


def _rng(*keys: int) -> np.random.Generator:
    return np.random.default_rng([int(k) & 0xFFFFFFFF for k in keys])


class ElementClass(IntEnum):
    BUTTON = 0
    TEXT = 1
    IMAGE = 2
    ICON = 3
    NAVIGATION_BAR = 4
    INPUT_FIELD = 5
    TOGGLE = 6
    CHECKBOX = 7
    SCROLL_ELEMENT = 8


ELEMENT_CLASS_NAMES = [
    "Button",
    "Text",
    "Image",
    "Icon",
    "NavigationBar",
    "InputField",
    "Toggle",
    "Checkbox",
    "ScrollElement",
]
_CLASS_BY_NAME = {name: ElementClass(i) for i, name in enumerate(ELEMENT_CLASS_NAMES)}

DEVICES = ("mobile", "web")


@dataclass
class Element:
    cls: ElementClass
    bbox: tuple[float, float, float, float]  # (x0, y0, x1, y1)
    z: int

    def validate(self) -> None:
        x0, y0, x1, y1 = self.bbox
        if not (0.0 <= x0 < x1 <= 1.0 and 0.0 <= y0 < y1 <= 1.0):
            raise ValueError(f"bbox out of order or out of [0,1]: {self.bbox}")
        if (x1 - x0) * (y1 - y0) < 1e-4:
            raise ValueError(f"bbox area below 1e-4: {self.bbox}")

    @property
    def center(self) -> tuple[float, float]:
        x0, y0, x1, y1 = self.bbox
        return ((x0 + x1) / 2.0, (y0 + y1) / 2.0)


@dataclass
class Wireframe:
    elements: list[Element]
    device: str = "mobile"
    canvas_aspect: float = 1.0

    def validate(self) -> None:
        if self.device not in DEVICES:
            raise ValueError(f"unknown device {self.device!r}")
        if not 3 <= len(self.elements) <= 12:
            raise ValueError(f"element count {len(self.elements)} outside [3, 12]")
        zs = [e.z for e in self.elements]
        if len(set(zs)) != len(zs):
            raise ValueError("z values must be unique")
        for e in self.elements:
            e.validate()

    def to_json_dict(self) -> dict:
        return {
            "device": self.device,
            "canvas_aspect": self.canvas_aspect,
            "elements": [
                {
                    "class": ELEMENT_CLASS_NAMES[e.cls],
                    "bbox": [round(float(v), 6) for v in e.bbox],
                    "z": e.z,
                }
                for e in self.elements
            ],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "Wireframe":
        try:
            elements = []
            for el in d["elements"]:
                bbox = tuple(float(v) for v in el["bbox"])
                if len(bbox) != 4:
                    raise ValueError(f"bbox must have 4 values, got {len(bbox)}")
                elements.append(
                    Element(cls=_CLASS_BY_NAME[el["class"]], bbox=bbox, z=int(el["z"]))
                )
            wf = cls(
                elements=elements,
                device=d.get("device", "mobile"),
                canvas_aspect=float(d.get("canvas_aspect", 1.0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed wireframe JSON: {exc}") from exc
        return wf


# --------------------------------------------------------------------------
# Themes

def _c(r: float, g: float, b: float) -> np.ndarray:
    """Convert a 0..1 RGB triple to the [-1,1] image range."""
    return np.array([2 * r - 1, 2 * g - 1, 2 * b - 1], dtype=np.float32)


THEMES: dict[str, dict[str, np.ndarray]] = {
    "light": dict(bg=_c(0.96, 0.96, 0.94), surface=_c(0.86, 0.88, 0.90),
                  primary=_c(0.16, 0.42, 0.82), accent=_c(0.92, 0.50, 0.18),
                  ink=_c(0.12, 0.13, 0.15)),
    "dark": dict(bg=_c(0.09, 0.10, 0.12), surface=_c(0.20, 0.22, 0.26),
                 primary=_c(0.35, 0.62, 0.95), accent=_c(0.95, 0.65, 0.25),
                 ink=_c(0.90, 0.91, 0.93)),
    "ocean": dict(bg=_c(0.88, 0.94, 0.96), surface=_c(0.74, 0.85, 0.90),
                  primary=_c(0.05, 0.45, 0.60), accent=_c(0.95, 0.45, 0.35),
                  ink=_c(0.08, 0.20, 0.26)),
    "forest": dict(bg=_c(0.92, 0.95, 0.89), surface=_c(0.79, 0.88, 0.77),
                   primary=_c(0.18, 0.50, 0.28), accent=_c(0.85, 0.60, 0.15),
                   ink=_c(0.10, 0.18, 0.12)),
    "sunset": dict(bg=_c(0.98, 0.92, 0.86), surface=_c(0.95, 0.81, 0.70),
                   primary=_c(0.85, 0.30, 0.25), accent=_c(0.55, 0.25, 0.60),
                   ink=_c(0.25, 0.12, 0.10)),
    "mono": dict(bg=_c(0.93, 0.93, 0.93), surface=_c(0.79, 0.79, 0.79),
                 primary=_c(0.25, 0.25, 0.25), accent=_c(0.55, 0.55, 0.55),
                 ink=_c(0.05, 0.05, 0.05)),
    "candy": dict(bg=_c(0.99, 0.90, 0.95), surface=_c(0.94, 0.78, 0.88),
                  primary=_c(0.90, 0.25, 0.55), accent=_c(0.25, 0.65, 0.90),
                  ink=_c(0.30, 0.08, 0.20)),
    "slate": dict(bg=_c(0.16, 0.18, 0.22), surface=_c(0.28, 0.32, 0.38),
                  primary=_c(0.45, 0.75, 0.70), accent=_c(0.90, 0.50, 0.45),
                  ink=_c(0.85, 0.88, 0.90)),
}
THEME_NAMES = tuple(THEMES)


def theme_for_seed(style_seed: int) -> str:
    return THEME_NAMES[int(_rng(_S_THEME, style_seed).integers(len(THEME_NAMES)))]


# --------------------------------------------------------------------------
# Captions

CATEGORY_BY_CLASS = [
    "action",      # Button
    "article",     # Text
    "media",       # Image
    "launcher",    # Icon
    "navigation",  # NavigationBar
    "form",        # InputField
    "settings",    # Toggle
    "checklist",   # Checkbox
    "feed",        # ScrollElement
]

VOCAB: list[str] = (
    ["<null>", "a", "page", "with", "elements"]
    + list(THEME_NAMES)
    + CATEGORY_BY_CLASS
    + [str(k) for k in range(3, 13)]
)
_WORD_TO_ID = {w: i for i, w in enumerate(VOCAB)}
CAPTION_LEN = 7
NULL_TOKEN_ID = 0


@dataclass
class Caption:
    raw: str
    tokens: np.ndarray  # (CAPTION_LEN,) int64


def dominant_class(w: Wireframe) -> ElementClass:
    counts = np.zeros(len(ELEMENT_CLASS_NAMES), dtype=int)
    for e in w.elements:
        counts[e.cls] += 1
    return ElementClass(int(np.argmax(counts)))  # argmax breaks ties toward lowest id


def make_caption(w: Wireframe, theme: str) -> Caption:
    if theme not in THEMES:
        raise ValueError(f"unknown theme {theme!r}")
    category = CATEGORY_BY_CLASS[dominant_class(w)]
    raw = f"a {theme} {category} page with {len(w.elements)} elements"
    return Caption(raw=raw, tokens=encode_caption(raw))


def encode_caption(raw: str) -> np.ndarray:
    words = raw.split(" ")
    if len(words) != CAPTION_LEN:
        raise ValueError(f"caption must have {CAPTION_LEN} words, got {len(words)}")
    try:
        ids = [_WORD_TO_ID[w] for w in words]
    except KeyError as exc:
        raise ValueError(f"word outside vocabulary: {exc}") from exc
    return np.asarray(ids, dtype=np.int64)


def decode_tokens(tokens) -> str:
    ids = np.asarray(tokens).ravel()
    return " ".join(VOCAB[int(i)] for i in ids)


def null_tokens() -> np.ndarray:
    return np.full(CAPTION_LEN, NULL_TOKEN_ID, dtype=np.int64)


# --------------------------------------------------------------------------
# Wireframe sampling

_FULL_ROW_CLASSES = [
    (ElementClass.TEXT, 0.26),
    (ElementClass.IMAGE, 0.21),
    (ElementClass.INPUT_FIELD, 0.17),
    (ElementClass.BUTTON, 0.15),
    (ElementClass.SCROLL_ELEMENT, 0.12),
    (ElementClass.TOGGLE, 0.05),
    (ElementClass.CHECKBOX, 0.04),
]
_CELL_CLASSES = [
    (ElementClass.ICON, 0.27),
    (ElementClass.CHECKBOX, 0.22),
    (ElementClass.TOGGLE, 0.21),
    (ElementClass.BUTTON, 0.16),
    (ElementClass.TEXT, 0.07),
    (ElementClass.INPUT_FIELD, 0.07),
]


def _weighted_choice(rng: np.random.Generator, table) -> ElementClass:
    names, weights = zip(*table)
    p = np.asarray(weights, dtype=np.float64)
    return names[int(rng.choice(len(names), p=p / p.sum()))]


def _row_height(rng: np.random.Generator, cls: ElementClass) -> float:
    lo, hi = {
        ElementClass.IMAGE: (0.12, 0.20),
        ElementClass.TEXT: (0.05, 0.10),
        ElementClass.SCROLL_ELEMENT: (0.015, 0.03),
    }.get(cls, (0.055, 0.085))
    return float(rng.uniform(lo, hi))


def sample_wireframe(seed: int, device: str) -> Wireframe:
    """Deterministic random wireframe for (seed, device).

    Mobile layouts favor single-column vertical stacking; web layouts always
    carry a top NavigationBar strip and often a right-hand scroll rail.
    """
    if device not in DEVICES:
        raise ValueError(f"unknown device {device!r}")
    rng = _rng(_S_WIREFRAME, seed, DEVICES.index(device))
    n_target = int(rng.integers(3, 13))
    elements: list[Element] = []
    y = 0.015
    x_left, x_right = 0.04, 0.96

    if device == "web" or rng.random() < 0.25:
        h = float(rng.uniform(0.06, 0.10))
        elements.append(Element(ElementClass.NAVIGATION_BAR, (0.0, y, 1.0, y + h), 0))
        y += h + float(rng.uniform(0.015, 0.03))
    if device == "web" and rng.random() < 0.55 and len(elements) < n_target:
        top = float(rng.uniform(0.16, 0.30))
        bot = float(rng.uniform(0.60, 0.85))
        elements.append(
            Element(ElementClass.SCROLL_ELEMENT, (0.965, top, 0.985, bot), len(elements))
        )
        x_right = 0.94

    col_weights = (0.62, 0.28, 0.10) if device == "mobile" else (0.38, 0.42, 0.20)
    while len(elements) < n_target and y < 0.92:
        remaining = n_target - len(elements)
        cols = min(int(rng.choice((1, 2, 3), p=col_weights)), remaining)
        if cols == 1:
            cls = _weighted_choice(rng, _FULL_ROW_CLASSES)
            h = _row_height(rng, cls)
            h = min(h, 0.985 - y)
            elements.append(Element(cls, (x_left, y, x_right, y + h), len(elements)))
        else:
            h = float(rng.uniform(0.05, 0.085))
            h = min(h, 0.985 - y)
            gap = 0.03
            cell_w = (x_right - x_left - gap * (cols - 1)) / cols
            for c in range(cols):
                cls = _weighted_choice(rng, _CELL_CLASSES)
                cx0 = x_left + c * (cell_w + gap)
                bbox = _cell_bbox(cls, cx0, y, cell_w, h)
                elements.append(Element(cls, bbox, len(elements)))
        y += h + float(rng.uniform(0.015, 0.03))

    while len(elements) < 3:  # space exhausted before reaching the minimum
        k = len(elements)
        elements.append(
            Element(ElementClass.ICON, (0.06 + 0.08 * k, 0.93, 0.115 + 0.08 * k, 0.985), k)
        )

    wf = Wireframe(elements=elements, device=device,
                   canvas_aspect=1.0 if device == "mobile" else 1.0)
    wf.validate()
    return wf


def _cell_bbox(cls: ElementClass, x0: float, y: float, w: float, h: float):
    if cls == ElementClass.ICON:
        s = min(h, w)
        cx = x0 + w / 2
        return (cx - s / 2, y, cx + s / 2, y + s)
    if cls == ElementClass.CHECKBOX:
        s = min(h * 0.85, w, 0.055)
        s = max(s, 0.018)
        cx = x0 + w / 2
        cy = y + h / 2
        return (cx - s / 2, cy - s / 2, cx + s / 2, cy + s / 2)
    if cls == ElementClass.TOGGLE:
        th = max(h * 0.65, 0.02)
        tw = min(w, th * 2.4)
        cx = x0 + w / 2
        cy = y + h / 2
        return (cx - tw / 2, cy - th / 2, cx + tw / 2, cy + th / 2)
    return (x0, y, x0 + w, y + h)


# --------------------------------------------------------------------------
# Rasterization

def pixel_span(lo: float, hi: float, resolution: int) -> tuple[int, int]:
    """Half-open pixel index range covered by a normalized [lo, hi) extent."""
    a = int(np.floor(lo * resolution + 1e-9))
    b = int(np.ceil(hi * resolution - 1e-9))
    a = max(0, min(a, resolution - 1))
    b = max(a + 1, min(b, resolution))
    return a, b


def rasterize_condition(w: Wireframe, resolution: int) -> np.ndarray:
    """(R, R, 10) binary map: channels 0..8 one-hot class occupancy with
    z-order overwrite, channel 9 the union of 1-pixel box borders."""
    if resolution not in (32, 64):
        raise ValueError("resolution must be 32 or 64")
    r = resolution
    class_idx = np.full((r, r), -1, dtype=np.int64)
    border = np.zeros((r, r), dtype=np.float32)
    for e in sorted(w.elements, key=lambda el: el.z):
        x0, y0, x1, y1 = e.bbox
        j0, j1 = pixel_span(x0, x1, r)
        i0, i1 = pixel_span(y0, y1, r)
        class_idx[i0:i1, j0:j1] = int(e.cls)
        border[i0, j0:j1] = 1.0
        border[i1 - 1, j0:j1] = 1.0
        border[i0:i1, j0] = 1.0
        border[i0:i1, j1 - 1] = 1.0
    out = np.zeros((r, r, 10), dtype=np.float32)
    ii, jj = np.nonzero(class_idx >= 0)
    out[ii, jj, class_idx[ii, jj]] = 1.0
    out[:, :, 9] = border
    return out


# --------------------------------------------------------------------------
# Rendering

def _contrasting(palette: dict, bg: np.ndarray, min_gap: float = 0.55) -> np.ndarray:
    """A palette color whose channel-mean differs from bg's by >= min_gap."""
    bg_mean = float(bg.mean())
    for key in ("primary", "ink", "accent"):
        cand = palette[key]
        if abs(float(cand.mean()) - bg_mean) >= min_gap:
            return cand
    shift = -min_gap if bg_mean > 0 else min_gap
    return np.clip(bg + shift, -1.0, 1.0).astype(np.float32)


def _fill(canvas: np.ndarray, i0, i1, j0, j1, color) -> None:
    canvas[i0:i1, j0:j1] = color


def render_gui(w: Wireframe, style_seed: int, resolution: int = 32) -> np.ndarray:
    """Deterministic low-fi render, float32 (R, R, 3) in [-1, 1]."""
    if resolution not in (32, 64):
        raise ValueError("resolution must be 32 or 64")
    r = resolution
    theme = theme_for_seed(style_seed)
    pal = THEMES[theme]
    rng = _rng(_S_STYLE, style_seed)
    canvas = np.tile(pal["bg"], (r, r, 1)).astype(np.float32)

    for e in sorted(w.elements, key=lambda el: el.z):
        x0, y0, x1, y1 = e.bbox
        j0, j1 = pixel_span(x0, x1, r)
        i0, i1 = pixel_span(y0, y1, r)
        bh, bw = i1 - i0, j1 - j0
        cls = e.cls

        if cls == ElementClass.BUTTON:
            color = _contrasting(pal, pal["bg"])
            _fill(canvas, i0, i1, j0, j1, color)
            rad = max(1, min(bh, bw) // 5)
            if min(bh, bw) > 2 * rad:
                for ci, cj in ((i0, j0), (i0, j1 - 1), (i1 - 1, j0), (i1 - 1, j1 - 1)):
                    canvas[ci, cj] = pal["bg"]  # clipped corners read as rounding
        elif cls == ElementClass.TEXT:
            last_frac = float(rng.uniform(0.4, 0.9))
            stripe_rows = [ri for ri in range(i0, i1) if (ri - i0) % 3 != 2]
            for ri in stripe_rows:
                jend = j1 if ri != stripe_rows[-1] else j0 + max(1, int(bw * last_frac))
                canvas[ri, j0:jend] = pal["ink"]
        elif cls == ElementClass.IMAGE:
            horizontal = bool(rng.random() < 0.5)
            c1, c2 = pal["primary"], pal["accent"]
            n = bw if horizontal else bh
            t = np.linspace(0.0, 1.0, n, dtype=np.float32)[:, None]
            grad = (1 - t) * c1 + t * c2
            if horizontal:
                canvas[i0:i1, j0:j1] = grad[None, :, :]
            else:
                canvas[i0:i1, j0:j1] = grad[:, None, :]
        elif cls == ElementClass.NAVIGATION_BAR:
            _fill(canvas, i0, i1, j0, j1, pal["surface"])
            n_items = int(rng.integers(2, 5))
            iw = max(1, bw // 10)
            ih = max(1, bh // 3)
            ci = i0 + (bh - ih) // 2
            for k in range(n_items):
                cj = j0 + 1 + int((k + 0.5) * bw / n_items) - iw // 2
                canvas[ci : ci + ih, max(j0, cj) : min(j1, cj + iw)] = pal["ink"]
        elif cls == ElementClass.INPUT_FIELD:
            interior = (pal["bg"] + 0.25 * (pal["ink"] - pal["bg"])).astype(np.float32)
            _fill(canvas, i0, i1, j0, j1, interior)
            canvas[i0, j0:j1] = pal["ink"]
            canvas[i1 - 1, j0:j1] = pal["ink"]
            canvas[i0:i1, j0] = pal["ink"]
            canvas[i0:i1, j1 - 1] = pal["ink"]
        elif cls == ElementClass.ICON:
            ci, cj = (i0 + i1 - 1) / 2.0, (j0 + j1 - 1) / 2.0
            rad = max(0.75, 0.48 * min(bh, bw))
            ii, jj = np.mgrid[i0:i1, j0:j1]
            mask = (ii - ci) ** 2 + (jj - cj) ** 2 <= rad * rad
            canvas[i0:i1, j0:j1][mask] = pal["accent"]
        elif cls == ElementClass.TOGGLE:
            _fill(canvas, i0, i1, j0, j1, pal["accent"])
            knob_w = max(1, bw // 3)
            on = bool(rng.random() < 0.5)
            kj0 = j1 - knob_w if on else j0
            canvas[i0:i1, kj0 : kj0 + knob_w] = pal["ink"]
        elif cls == ElementClass.CHECKBOX:
            _fill(canvas, i0, i1, j0, j1, pal["ink"])
            if bh > 2 and bw > 2:
                canvas[i0 + 1 : i1 - 1, j0 + 1 : j1 - 1] = pal["accent"]
        elif cls == ElementClass.SCROLL_ELEMENT:
            _fill(canvas, i0, i1, j0, j1, pal["surface"])
            if bw >= bh:  # horizontal bar: thumb occupies a sub-span
                tw = max(1, bw // 3)
                tj = j0 + int(rng.integers(0, max(1, bw - tw + 1)))
                canvas[i0:i1, tj : tj + tw] = pal["accent"]
            else:
                th = max(1, bh // 3)
                ti = i0 + int(rng.integers(0, max(1, bh - th + 1)))
                canvas[ti : ti + th, j0:j1] = pal["accent"]
    return canvas


# --------------------------------------------------------------------------
# PNG round trip

def quantize(img: np.ndarray) -> np.ndarray:
    """[-1,1] float -> uint8 (linear map)."""
    return np.clip(np.round((np.asarray(img) + 1.0) * 127.5), 0, 255).astype(np.uint8)


def dequantize(u8: np.ndarray) -> np.ndarray:
    """uint8 -> [-1,1] float32 (linear map)."""
    return (u8.astype(np.float32) / 127.5) - 1.0


def image_to_png_bytes(img: np.ndarray) -> bytes:
    buf = io.BytesIO()
    PILImage.fromarray(quantize(img)).save(buf, format="PNG")
    return buf.getvalue()


def png_bytes_to_image(data: bytes) -> np.ndarray:
    with PILImage.open(io.BytesIO(data)) as im:
        return dequantize(np.asarray(im.convert("RGB")))


def save_png(img: np.ndarray, path: Path) -> None:
    Path(path).write_bytes(image_to_png_bytes(img))


def load_png(path: Path) -> np.ndarray:
    return png_bytes_to_image(Path(path).read_bytes())


# --------------------------------------------------------------------------
# Dataset packaging

@dataclass
class DatasetManifest:
    seed: int
    schema_version: int
    resolution: int
    k_fixations: int
    records: list[dict] = field(default_factory=list)

    def validate(self, root: Path) -> None:
        root = Path(root)
        ids = [r["id"] for r in self.records]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate record ids in manifest")
        for rec in self.records:
            for key in ("image_path", "wireframe_path", "scanpath_path"):
                if not (root / rec[key]).is_file():
                    raise FileNotFoundError(root / rec[key])


def build_dataset(
    n: int,
    seed: int,
    out_dir: Path,
    resolution: int = 32,
    oracle: OracleConfig = OracleConfig(),
) -> DatasetManifest:
    """Write n records (PNG + wireframe JSON + scanpath JSON) plus manifest.

    Record i derives everything from seed + i; scanpaths are predicted on the
    PNG-quantized render so stored paths equal a recompute on the stored file.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    root = Path(out_dir)
    for sub in ("images", "wireframes", "scanpaths"):
        (root / sub).mkdir(parents=True, exist_ok=True)

    manifest = DatasetManifest(
        seed=seed, schema_version=SCHEMA_VERSION, resolution=resolution,
        k_fixations=oracle.k_fixations,
    )
    for i in range(n):
        rec_seed = seed + i
        rid = f"{i:06d}"
        device = "mobile" if _rng(_S_DEVICE, rec_seed).random() < 0.5 else "web"
        wf = sample_wireframe(rec_seed, device)
        theme = theme_for_seed(rec_seed)
        img = render_gui(wf, rec_seed, resolution)
        png = image_to_png_bytes(img)
        stored = png_bytes_to_image(png)
        path = predict_scanpath_np(stored, oracle)
        caption = make_caption(wf, theme)

        (root / "images" / f"{rid}.png").write_bytes(png)
        (root / "wireframes" / f"{rid}.json").write_text(
            json.dumps(wf.to_json_dict(), sort_keys=True)
        )
        (root / "scanpaths" / f"{rid}.json").write_text(
            json.dumps([[float(x), float(y)] for x, y in path])
        )
        manifest.records.append(
            {
                "id": rid,
                "image_path": f"images/{rid}.png",
                "wireframe_path": f"wireframes/{rid}.json",
                "scanpath_path": f"scanpaths/{rid}.json",
                "caption": caption.raw,
            }
        )

    header = {
        "schema_version": manifest.schema_version,
        "seed": manifest.seed,
        "count": n,
        "resolution": resolution,
        "k_fixations": oracle.k_fixations,
    }
    lines = [json.dumps(header, sort_keys=True)]
    lines += [json.dumps(r, sort_keys=True) for r in manifest.records]
    (root / "manifest.jsonl").write_text("\n".join(lines) + "\n")
    manifest.validate(root)
    return manifest


def load_manifest(root: Path) -> DatasetManifest:
    root = Path(root)
    lines = (root / "manifest.jsonl").read_text().splitlines()
    if not lines:
        raise ValueError("empty manifest")
    header = json.loads(lines[0])
    if "schema_version" not in header:
        raise ValueError("manifest header missing schema_version")
    manifest = DatasetManifest(
        seed=header["seed"],
        schema_version=header["schema_version"],
        resolution=header.get("resolution", 32),
        k_fixations=header.get("k_fixations", 6),
        records=[json.loads(ln) for ln in lines[1:] if ln.strip()],
    )
    return manifest


@dataclass
class ExampleRecord:
    image: np.ndarray  # (R, R, 3) float32 in [-1,1]
    wireframe: Wireframe
    caption: str
    scanpath: np.ndarray  # (K, 2) float64


def load_record(root: Path, rec: dict) -> ExampleRecord:
    root = Path(root)
    image = load_png(root / rec["image_path"])
    wf = Wireframe.from_json_dict(json.loads((root / rec["wireframe_path"]).read_text()))
    sp = np.asarray(json.loads((root / rec["scanpath_path"]).read_text()), dtype=np.float64)
    return ExampleRecord(image=image, wireframe=wf, caption=rec["caption"], scanpath=sp)
