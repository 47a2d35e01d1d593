"""Command-line entry point wiring all modules.

Subcommands: aggregate, eval, train, predict, retarget, thumbnail,
serve, synth. Batch operations run locally; `predict` can also act as a
thin client of a running service via --server. Exit codes: 0 ok,
2 usage, 3 data error, 4 internal.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import DataError, ParameterError, TrainingDivergedError, VisimpError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4

DEFAULT_SIGMA = 16.0  # blur radius 32 px under the radius = 2*sigma convention


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="visimp", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    agg = sub.add_parser("aggregate", help="attention records -> importance map PNG")
    agg.add_argument("--clicks", help="click/fixation log JSON")
    agg.add_argument("--masks", help="annotation-mask manifest JSON")
    agg.add_argument("--sigma", type=float, default=DEFAULT_SIGMA,
                     help="blur sigma in px for click logs (default 16)")
    agg.add_argument("-o", "--output", required=True, help="output map PNG")

    ev = sub.add_parser("eval", help="compare prediction map(s) against ground truth")
    ev.add_argument("--pred", required=True, help="map PNG or directory of maps")
    ev.add_argument("--gt", required=True, help="map PNG or directory of maps")
    ev.add_argument("--metrics", default="kl,cc,rmse,r2",
                    help="comma list from kl,cc,rmse,r2")

    tr = sub.add_parser("train", help="train the toy predictor on an image/map corpus")
    tr.add_argument("--data", required=True,
                    help="corpus dir with images/NNNN.png and maps/NNNN.png")
    tr.add_argument("--epochs", type=int, default=30)
    tr.add_argument("--lr", type=float, default=0.2)
    tr.add_argument("--batch-size", type=int, default=8)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--skip", action=argparse.BooleanOptionalAction, default=True,
                    help="merge a finer-resolution skip connection")
    tr.add_argument("-o", "--output", required=True, help="output checkpoint path")

    pr = sub.add_parser("predict", help="image -> importance map PNG")
    pr.add_argument("--image", required=True)
    pr.add_argument("--ckpt", help="checkpoint for the toy net")
    pr.add_argument("--external-map", help="serve this stored map, resampled")
    pr.add_argument("--server", help="POST to a running service instead, e.g. http://localhost:8000")
    pr.add_argument("-o", "--output", required=True)

    rt = sub.add_parser("retarget", help="crop of maximal importance at an aspect")
    rt.add_argument("--image", required=True)
    rt.add_argument("--map", dest="map_path", help="importance map PNG")
    rt.add_argument("--ckpt", help="predict the map with this checkpoint")
    rt.add_argument("--method", choices=["importance", "edge", "random"],
                    default="importance")
    rt.add_argument("--aspect", help='crop aspect "W:H", e.g. "1:4"')
    rt.add_argument("--width", type=int, help="exact crop width px")
    rt.add_argument("--height", type=int, help="exact crop height px")
    rt.add_argument("--seed", type=int, default=0, help="position seed for --method random")
    rt.add_argument("-o", "--output", required=True, help="output crop PNG")

    th = sub.add_parser("thumbnail", help="carve + fade to a square thumbnail")
    th.add_argument("--image", required=True)
    th.add_argument("--map", dest="map_path", help="importance map PNG")
    th.add_argument("--ckpt", help="predict the map with this checkpoint")
    th.add_argument("--size", type=int, default=128, help="thumbnail side px")
    th.add_argument("-o", "--output", required=True)

    sv = sub.add_parser("serve", help="run the HTTP service")
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--port", type=int, default=None, help="default: $VISIMP_PORT or 8000")
    sv.add_argument("--ckpt", help="default: $VISIMP_CKPT")
    sv.add_argument("--external-map", help="default: $VISIMP_EXTMAP")
    sv.add_argument("--max-px", type=int, default=None, help="default: $VISIMP_MAXPX or 1500")

    sy = sub.add_parser("synth", help="generate a synthetic design corpus")
    sy.add_argument("--count", type=int, required=True)
    sy.add_argument("--size", default="64x64", help="WxH, default 64x64")
    sy.add_argument("--seed", type=int, default=0)
    sy.add_argument("-o", "--output", required=True, help="output corpus directory")

    return p


def _cmd_aggregate(args, parser) -> int:
    from . import ground_truth
    from .raster import write_map

    if bool(args.clicks) == bool(args.masks):
        parser.error("give exactly one of --clicks or --masks")
    if args.clicks:
        log = ground_truth.load_click_log(args.clicks)
        map_ = ground_truth.aggregate_points(log, sigma=args.sigma)
    else:
        annotations = ground_truth.load_annotation_set(args.masks)
        map_ = ground_truth.aggregate_masks(annotations)
    write_map(map_, args.output)
    print(json.dumps({"output": args.output, "width": map_.width, "height": map_.height}))
    return EXIT_OK


def _eval_pair(pred_path, gt_path, which):
    from .metrics import compute_metrics
    from .raster import read_map

    report = compute_metrics(read_map(pred_path), read_map(gt_path), which=which)
    return report.to_dict()


def _cmd_eval(args, parser) -> int:
    which = tuple(m.strip() for m in args.metrics.split(",") if m.strip())
    pred = Path(args.pred)
    gt = Path(args.gt)
    if pred.is_dir() != gt.is_dir():
        parser.error("--pred and --gt must both be files or both directories")
    if not pred.is_dir():
        print(json.dumps(_eval_pair(pred, gt, which), sort_keys=True))
        return EXIT_OK
    names = sorted(p.name for p in pred.glob("*.png"))
    if not names:
        raise DataError(f"no maps found under {pred}")
    totals = {m: 0.0 for m in which}
    for name in names:
        other = gt / name
        if not other.exists():
            raise DataError(f"ground truth missing for {name}")
        row = _eval_pair(pred / name, other, which)
        for m in which:
            totals[m] += row[m]
        print(json.dumps({"pair": name, **row}, sort_keys=True))
    avg = {m: totals[m] / len(names) for m in which}
    print(json.dumps({"average": True, "pairs": len(names), **avg}, sort_keys=True))
    return EXIT_OK


def _load_training_corpus(data_dir: Path):
    from .predictor import TrainingSample
    from .raster import read_image, read_map

    images = data_dir / "images"
    maps = data_dir / "maps"
    if not images.is_dir() or not maps.is_dir():
        raise DataError(f"{data_dir} must contain images/ and maps/ subdirectories")
    samples = []
    for img_path in sorted(images.glob("*.png")):
        map_path = maps / img_path.name
        if not map_path.exists():
            raise DataError(f"map missing for {img_path.name}")
        samples.append(TrainingSample(read_image(img_path), read_map(map_path)))
    if not samples:
        raise DataError(f"no samples under {data_dir}")
    return samples


def _cmd_train(args, parser) -> int:
    from .predictor import TrainConfig, save_checkpoint, train

    samples = _load_training_corpus(Path(args.data))
    cfg = TrainConfig(
        epochs=args.epochs,
        learning_rate=args.lr,
        batch_size=args.batch_size,
        seed=args.seed,
        skip_connections=args.skip,
    )
    ckpt = train(samples, cfg)
    save_checkpoint(ckpt, args.output)
    curve = ckpt.metadata["loss_curve"]
    print(json.dumps({
        "output": args.output,
        "samples": len(samples),
        "epochs": args.epochs,
        "first_loss": curve[0] if curve else None,
        "final_loss": curve[-1] if curve else None,
    }))
    return EXIT_OK


def _local_predictor(ckpt_path, external_map_path):
    from .predictor import CheckpointPredictor, ExternalMapPredictor

    if bool(ckpt_path) == bool(external_map_path):
        return None
    if ckpt_path:
        return CheckpointPredictor.from_file(ckpt_path)
    return ExternalMapPredictor(external_map_path)


def _cmd_predict(args, parser) -> int:
    from .raster import read_image, write_map

    sources = [bool(args.ckpt), bool(args.external_map), bool(args.server)]
    if sum(sources) != 1:
        parser.error("give exactly one of --ckpt, --external-map, or --server")
    if args.server:
        import urllib.request

        data = Path(args.image).read_bytes()
        req = urllib.request.Request(
            args.server.rstrip("/") + "/predict",
            data=data,
            headers={"Content-Type": "image/png"},
            method="POST",
        )
        with urllib.request.urlopen(req) as resp:
            Path(args.output).write_bytes(resp.read())
            elapsed = resp.headers.get("X-Compute-Time-Ms")
        print(json.dumps({"output": args.output, "server": args.server,
                          "compute_time_ms": float(elapsed) if elapsed else None}))
        return EXIT_OK
    predictor = _local_predictor(args.ckpt, args.external_map)
    map_ = predictor.predict(read_image(args.image))
    write_map(map_, args.output)
    print(json.dumps({"output": args.output, "width": map_.width, "height": map_.height}))
    return EXIT_OK


def _map_for_image(args, image):
    from .predictor import CheckpointPredictor
    from .raster import read_map

    if args.map_path and args.ckpt:
        raise ParameterError("give --map or --ckpt, not both")
    if args.map_path:
        map_ = read_map(args.map_path)
        if (map_.width, map_.height) != (image.width, image.height):
            raise DataError(
                f"map {map_.width}x{map_.height} does not match image "
                f"{image.width}x{image.height}"
            )
        return map_
    if args.ckpt:
        return CheckpointPredictor.from_file(args.ckpt).predict(image)
    return None


def _cmd_retarget(args, parser) -> int:
    from .raster import edge_energy, read_image, write_image
    from .retarget import CropSpec, best_crop, random_crop, retarget_image

    if args.aspect and (args.width or args.height):
        parser.error("give --aspect or --width/--height, not both")
    if not args.aspect and not (args.width and args.height):
        parser.error("give --aspect or both --width and --height")
    spec = (
        CropSpec.parse_aspect(args.aspect)
        if args.aspect
        else CropSpec(size=(args.width, args.height))
    )
    image = read_image(args.image)
    if args.method == "edge":
        map_ = edge_energy(image)
    else:
        map_ = _map_for_image(args, image)
        if map_ is None and args.method == "importance":
            parser.error("--method importance needs --map or --ckpt")
        if map_ is None:
            # random placement without a map: report zero importance
            import numpy as np

            from .raster import ImportanceMap

            map_ = ImportanceMap(np.zeros((image.height, image.width)))
    if args.method == "random":
        crop = random_crop(map_, spec, seed=args.seed)
    else:
        # a map loaded from file is an externally computed importance source
        label = "external" if (args.method == "importance" and args.map_path) else args.method
        crop = best_crop(map_, spec, method=label)
    write_image(retarget_image(image, crop), args.output)
    print(json.dumps({"output": args.output, **crop.to_dict()}, sort_keys=True))
    return EXIT_OK


def _cmd_thumbnail(args, parser) -> int:
    from .raster import read_image, write_image
    from .thumbnail import make_thumbnail

    image = read_image(args.image)
    map_ = _map_for_image(args, image)
    if map_ is None:
        parser.error("give --map or --ckpt")
    out = make_thumbnail(image, map_, side=args.size)
    write_image(out, args.output)
    print(json.dumps({"output": args.output, "side": args.size}))
    return EXIT_OK


def _cmd_serve(args, parser) -> int:
    import os

    import uvicorn

    from .service import Settings, create_app

    settings = Settings.from_env()
    if args.ckpt:
        settings.checkpoint_path = args.ckpt
    if args.external_map:
        settings.external_map_path = args.external_map
    if args.max_px:
        settings.max_px = args.max_px
    port = args.port or int(os.environ.get("VISIMP_PORT", 8000))
    uvicorn.run(create_app(settings), host=args.host, port=port, log_level="info")
    return EXIT_OK


def _cmd_synth(args, parser) -> int:
    from .synth import generate_corpus

    try:
        w, h = (int(v) for v in args.size.lower().split("x"))
    except ValueError:
        parser.error(f"bad --size {args.size!r}; expected WxH like 64x64")
    written = generate_corpus(args.count, w, h, seed=args.seed, out_dir=args.output)
    print(json.dumps({"output": args.output, "count": len(written), "size": args.size}))
    return EXIT_OK


_COMMANDS = {
    "aggregate": _cmd_aggregate,
    "eval": _cmd_eval,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "retarget": _cmd_retarget,
    "thumbnail": _cmd_thumbnail,
    "serve": _cmd_serve,
    "synth": _cmd_synth,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args, parser)
    except (ParameterError, DataError, TrainingDivergedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except VisimpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports and exits
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
