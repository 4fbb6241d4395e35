"""Command-line pipeline: embed, extract, ssim, surface, complexity.

Reports are JSON documents validating against the schema shipped in
``schemas/report.schema.json``. Failures print a machine-readable error
category to stderr and exit nonzero. All file outputs are written
atomically. Wall-clock timing is printed to stdout only, never written
into reports, so identical inputs give byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from .blocks import dct2, partition_blocks
from .complexity import complexity_report
from .metric import (SsimConstants, global_ssim, measure_all_modes,
                     mode_from_label)
from .optimize import Objective, candidate_ks, optimize_image, ssim_surface
from .pgm import PgmError, load_image, save_image, write_bytes_atomic
from .qim import (DEFAULT_PAIR, EmbedConfig, PAYLOAD_GENERATOR, as_bits,
                  embed_payload, extract_payload, lattice_residuals,
                  random_bits, read_bits_binary, read_bits_text)

SCHEMA_VERSION = 1


def _fail(category: str, message: str) -> int:
    sys.stderr.write(json.dumps({"category": category, "message": message})
                     + "\n")
    return 1


def _write_json_atomic(path, document: dict) -> None:
    payload = json.dumps(document, sort_keys=True, indent=2) + "\n"
    write_bytes_atomic(path, payload.encode("ascii"))


def _parse_pair(text: str):
    parts = text.split(",")
    if len(parts) != 4:
        raise ValueError("--pair expects four integers: p1,q1,p2,q2")
    p1, q1, p2, q2 = (int(v) for v in parts)
    return ((p1, q1), (p2, q2))


def _parse_dims(text: str):
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise ValueError("--dims expects WIDTHxHEIGHT, e.g. 360x288")
    width, height = int(parts[0]), int(parts[1])
    return width, height


def _constants(args) -> SsimConstants:
    return SsimConstants(k1=args.k1, k2=args.k2)


def _pair_json(pair):
    return [[pair[0][0], pair[0][1]], [pair[1][0], pair[1][1]]]


def cmd_embed(args) -> int:
    started = time.perf_counter()
    plane = load_image(args.input)
    plane.require_block_aligned()
    cfg = EmbedConfig(strength=args.strength, pair=_parse_pair(args.pair),
                      constants=_constants(args),
                      mode=mode_from_label(args.mode),
                      k_search_radius=args.k_radius)
    block_count = (plane.height // 4) * (plane.width // 4)
    if args.payload is not None:
        reader = read_bits_binary if args.payload_format == "binary" \
            else read_bits_text
        bits = as_bits(reader(args.payload))
        source = {"kind": "file", "path": args.payload,
                  "format": args.payload_format}
        if bits.size != block_count:
            raise ValueError(
                f"payload holds {bits.size} bits but the image has "
                f"{block_count} blocks")
    else:
        bits = random_bits(block_count, args.seed)
        source = {"kind": "seed", "seed": args.seed,
                  "generator": PAYLOAD_GENERATOR}
    result = optimize_image(plane, bits, cfg)
    marked = embed_payload(plane, bits, result.solutions, cfg)
    save_image(marked, args.output)
    reloaded = load_image(args.output)
    extracted = extract_payload(reloaded, cfg)
    bit_errors = int(np.sum(extracted != bits))
    quality = measure_all_modes(plane, reloaded, cfg.constants)
    solutions = []
    bw = plane.width // 4
    for p, row in enumerate(result.solutions):
        for q, sol in enumerate(row):
            solutions.append({"block": [p, q], "eps": sol.eps,
                              "sigma": sol.sigma, "k": sol.k,
                              "bit": sol.bit, "local_ssim": sol.local_ssim})
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "embed",
        "config": {
            "strength": cfg.strength,
            "mode": cfg.mode.label,
            "pair": _pair_json(cfg.pair),
            "k1": cfg.constants.k1,
            "k2": cfg.constants.k2,
            "dynamic_range": cfg.constants.dynamic_range,
            "k_search_radius": cfg.k_search_radius,
        },
        "image": {"input": args.input, "output": args.output,
                  "width": plane.width, "height": plane.height},
        "payload": {"length": int(bits.size),
                    "bits": "".join(str(int(b)) for b in bits),
                    "source": source},
        "solutions": solutions,
        "mean_block_ssim": result.mean_block_ssim,
        "ssim": quality,
        "self_extract_bit_errors": bit_errors,
        "complexity": complexity_report(plane.height, plane.width)
        .to_json_dict(),
    }
    if args.report:
        _write_json_atomic(args.report, report)
    elapsed = time.perf_counter() - started
    print(f"embedded {bits.size} bits into {args.output} "
          f"(mode {cfg.mode.label}, strength {cfg.strength:g}); "
          f"self-extract errors {bit_errors}; {elapsed:.2f}s")
    for label in ("non", "over4", "gauss", "semi"):
        print(f"ssim[{label}] = {quality[label]:.6f}")
    return 0


def cmd_extract(args) -> int:
    plane = load_image(args.input)
    plane.require_block_aligned()
    cfg = EmbedConfig(strength=args.strength, pair=_parse_pair(args.pair))
    bits = extract_payload(plane, cfg)
    text = "".join(str(int(b)) for b in bits) + "\n"
    write_bytes_atomic(args.out_bits, text.encode("ascii"))
    if args.report:
        residuals = lattice_residuals(plane, cfg)
        report = {
            "schema_version": SCHEMA_VERSION,
            "command": "extract",
            "config": {"strength": cfg.strength,
                       "pair": _pair_json(cfg.pair)},
            "image": {"input": args.input, "width": plane.width,
                      "height": plane.height},
            "bits": text.strip(),
            "residuals": [[float(v) for v in row] for row in residuals],
        }
        _write_json_atomic(args.report, report)
    print(f"extracted {bits.size} bits to {args.out_bits}")
    return 0


def cmd_ssim(args) -> int:
    a = load_image(args.a)
    b = load_image(args.b)
    constants = _constants(args)
    means = {}
    for label in args.modes.split(","):
        label = label.strip()
        mode = mode_from_label(label)
        means[label] = global_ssim(a, b, mode, constants).mean_ssim
        print(f"{label}\t{means[label]:.12g}")
    if args.report:
        _write_json_atomic(args.report, {
            "schema_version": SCHEMA_VERSION,
            "command": "ssim",
            "a": args.a,
            "b": args.b,
            "modes": means,
        })
    return 0


def cmd_surface(args) -> int:
    plane = load_image(args.input)
    plane.require_block_aligned()
    pair = _parse_pair(args.pair)
    parts = args.block.split(",")
    if len(parts) != 2:
        raise ValueError("--block expects block row,col")
    p, q = int(parts[0]), int(parts[1])
    blocks = partition_blocks(plane)
    if not (0 <= p < blocks.shape[0] and 0 <= q < blocks.shape[1]):
        raise ValueError(
            f"block ({p}, {q}) outside the "
            f"{blocks.shape[0]}x{blocks.shape[1]} block grid")
    objective = Objective(dct2(blocks[p, q]), args.strength, args.bit, pair,
                          _constants(args))
    if args.ks:
        lo, hi = (int(v) for v in args.ks.split(","))
        k_values = range(lo, hi + 1)
    else:
        center = candidate_ks(objective, 1)[0]
        k_values = range(center - 3, center + 4)
    if args.eps:
        lo, hi, step = (float(v) for v in args.eps.split(","))
        count = int(math.floor((hi - lo) / step)) + 1
        eps_values = [lo + i * step for i in range(count)]
    else:
        span = 2.0 * args.strength
        eps_values = np.linspace(-span, span, 401).tolist()
    samples = ssim_surface(objective, eps_values, k_values)
    lines = ["k,eps,ssim"]
    lines += [f"{s.k},{s.eps:.10g},{s.ssim:.12g}" for s in samples]
    write_bytes_atomic(args.out, ("\n".join(lines) + "\n").encode("ascii"))
    best = max(samples, key=lambda s: s.ssim)
    others = [s for s in samples if s.k != best.k]
    print(f"best k={best.k} eps={best.eps:.6g} ssim={best.ssim:.6f}")
    if others:
        second = max(others, key=lambda s: s.ssim)
        print(f"runner-up k={second.k} eps={second.eps:.6g} "
              f"ssim={second.ssim:.6f}")
    print(f"wrote {len(samples)} samples to {args.out}")
    return 0


def cmd_complexity(args) -> int:
    width, height = _parse_dims(args.dims)
    report = complexity_report(height, width)
    print(report.format_table())
    if args.report:
        document = {"schema_version": SCHEMA_VERSION, "command": "complexity"}
        document.update(report.to_json_dict())
        _write_json_atomic(args.report, document)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssimmark",
        description="blind 4x4-block watermarking guided by a "
                    "structural-similarity model")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_constants(p):
        p.add_argument("--k1", type=float, default=0.01,
                       help="luminance stabilizer fraction")
        p.add_argument("--k2", type=float, default=0.03,
                       help="contrast stabilizer fraction")

    p = sub.add_parser("embed", help="embed a bit payload")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--strength", type=float, required=True)
    p.add_argument("--mode", default="non",
                   help="non, over4, gauss or semi")
    p.add_argument("--pair", default="0,1,1,0",
                   help="coefficient pair as p1,q1,p2,q2")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--payload", help="bit file to embed")
    group.add_argument("--seed", type=int, help="seeded random payload")
    p.add_argument("--payload-format", choices=("text", "binary"),
                   default="text")
    p.add_argument("--k-radius", type=int, default=1,
                   help="lattice candidates per block = 2 * radius")
    p.add_argument("--report", help="write a JSON run report here")
    add_constants(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("extract", help="blind payload extraction")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--strength", type=float, required=True)
    p.add_argument("--pair", default="0,1,1,0")
    p.add_argument("--out-bits", dest="out_bits", required=True)
    p.add_argument("--report", help="optional JSON report with residuals")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("ssim", help="mean similarity under window regimes")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--modes", default="non,over4,gauss,semi")
    p.add_argument("--report")
    add_constants(p)
    p.set_defaults(func=cmd_ssim)

    p = sub.add_parser("surface",
                       help="similarity surface of one block as CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--block", required=True, help="block row,col")
    p.add_argument("--strength", type=float, required=True)
    p.add_argument("--bit", type=int, choices=(0, 1), required=True)
    p.add_argument("--pair", default="0,1,1,0")
    p.add_argument("--out", required=True)
    p.add_argument("--ks", help="inclusive lattice index range lo,hi")
    p.add_argument("--eps", help="shift grid lo,hi,step")
    add_constants(p)
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("complexity", help="operation accounting table")
    p.add_argument("--dims", required=True, help="WIDTHxHEIGHT")
    p.add_argument("--report")
    p.set_defaults(func=cmd_complexity)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PgmError as exc:
        return _fail(f"pgm-{exc.category}", str(exc))
    except FileNotFoundError as exc:
        return _fail("not-found", str(exc))
    except IsADirectoryError as exc:
        return _fail("io", str(exc))
    except ValueError as exc:
        return _fail("invalid-input", str(exc))
    except OSError as exc:
        return _fail("io", str(exc))


if __name__ == "__main__":
    raise SystemExit(main())
