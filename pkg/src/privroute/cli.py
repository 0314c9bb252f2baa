"""Command-line entry points.

    privroute run --role bob --listen HOST:PORT --path FILE [--key FILE | --key-bits N]
    privroute run --role alice --connect HOST:PORT --path FILE
    privroute bench [--trials N] [--seed N] [--coord-range MIN:MAX] [--key-bits N] [--out FILE]
    privroute sim --config FILE [--out FILE]
    privroute probe --config FILE --path FILE [--out FILE]
    privroute keygen --key-bits N --out FILE
"""
from __future__ import annotations

import argparse
import json
import socket
import sys
from dataclasses import replace

from . import bench, files
from .flight import coincidences, find_violations, flight_sim
from .paillier import keygen
from .probe import brute_force_probe, raster_path
from .session import run_alice, run_bob
from .wire import ProtocolError


def _address(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise argparse.ArgumentTypeError(f"expected HOST:PORT, got {text!r}")
    return host or "127.0.0.1", int(port)


def _coord_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition(":")
    try:
        lo_i, hi_i = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected MIN:MAX, got {text!r}") from None
    if not sep or lo_i > hi_i:
        raise argparse.ArgumentTypeError(f"expected MIN:MAX with MIN <= MAX, got {text!r}")
    return lo_i, hi_i


def _listen(address: tuple[str, int]) -> socket.socket:
    return socket.create_server(address)


def _write(out, text: str) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)


def _keypair(args):
    if getattr(args, "key", None):
        return files.load_keypair(args.key)
    return keygen(args.key_bits)


def cmd_bob(args) -> int:
    path = files.load_path(args.path)
    keypair = _keypair(args)
    with _listen(args.listen) as listener:
        print(f"listening on {args.listen[0]}:{listener.getsockname()[1]}", file=sys.stderr, flush=True)
        metrics = run_bob(listener, keypair, path)
    for k, v in metrics.as_dict().items():
        print(f"{k}={v}")
    _write(args.out, json.dumps(metrics.as_dict(), indent=2) + "\n")
    return 0


def cmd_alice(args) -> int:
    path = files.load_path(args.path)
    hits, metrics = run_alice(socket.create_connection(args.connect), path)
    print("colliding_segments=" + ",".join(str(i) for i in sorted(hits)))
    for k, v in metrics.as_dict().items():
        print(f"{k}={v}")
    _write(args.out, json.dumps({"colliding_segments": sorted(hits), **metrics.as_dict()}, indent=2) + "\n")
    return 0


def cmd_run(args) -> int:
    if args.role == "bob":
        if not args.listen:
            raise SystemExit("--role bob needs --listen HOST:PORT")
        return cmd_bob(args)
    if not args.connect:
        raise SystemExit("--role alice needs --connect HOST:PORT")
    return cmd_alice(args)


def cmd_bench(args) -> int:
    lo, hi = args.coord_range
    cfg = bench.BenchConfig(trials=args.trials, coord_min=lo, coord_max=hi,
                            key_bits=args.key_bits, seed=args.seed)
    show = lambda rec: print(next(iter(bench.Metrics(0, 0, 0, [rec]).trial_lines())), flush=True)
    if args.role == "bob":
        if not args.listen:
            raise SystemExit("bench --role bob needs --listen HOST:PORT")
        with _listen(args.listen) as listener:
            report = bench.run_bench_bob(cfg, listener, progress=show)
    elif args.role == "alice":
        if not args.connect:
            raise SystemExit("bench --role alice needs --connect HOST:PORT")
        report = bench.run_bench_alice(cfg, args.connect, progress=show)
    else:
        report = bench.run_bench(cfg, progress=show)
    print(report.table())
    _write(args.out, report.dumps() + "\n")
    wrong = [t.trial for t in report.trials if t.collision is not None and t.collision != t.expected]
    if wrong:
        print(f"error: trials {wrong} disagree with the plaintext oracle", file=sys.stderr)
        return 1
    return 0


def cmd_sim(args) -> int:
    drones, cfg = files.load_sim_config(args.config)
    log = flight_sim(drones, cfg, log_every=args.log_every)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        log.write(out)
    finally:
        if args.out:
            out.close()
    bad = find_violations(log, cfg) if args.log_every == 1 else []
    summary = {"event": "summary", "ticks": max(r.tick for r in log.records) + 1, "dt": log.dt,
               "encounters": log.encounters, "violations": bad}
    if args.log_every == 1:
        summary["coincidences"] = coincidences(log, cfg)
    print(json.dumps(summary), file=sys.stderr)
    return 1 if bad else 0


def cmd_probe(args) -> int:
    cfg = files.load_probe_config(args.config)
    if args.key_bits:
        cfg = replace(cfg, key_bits=args.key_bits)
    bob_path = files.load_path(args.path)
    report = brute_force_probe(cfg, bob_path)
    _, cells = raster_path(cfg)
    hit = set(report.cells_hit)
    lines = [json.dumps({"segment": i, "band": b, "column": c, "hit": (b, c) in hit})
             for i, (b, c) in enumerate(cells)]
    lines.append(json.dumps({"event": "summary", **report.as_dict()}))
    text = "\n".join(lines) + "\n"
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    print(f"probe segments={report.probe_segments} subprotocol calls={report.subprotocol_calls} "
          f"bytes={report.bytes_total} cells hit={len(report.cells_hit)} "
          f"extrapolated 1 km^2 @ 1 m: {report.extrapolated_hours_1km2:.1f} h", file=sys.stderr)
    return 0


def cmd_keygen(args) -> int:
    files.save_keypair(args.out, keygen(args.key_bits))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="privroute", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one protocol role over TCP")
    run.add_argument("--role", choices=("alice", "bob"), required=True)
    run.add_argument("--listen", type=_address)
    run.add_argument("--connect", type=_address)
    run.add_argument("--path", required=True)
    run.add_argument("--key", help="JSON key file (bob); generated when omitted")
    run.add_argument("--key-bits", type=int, default=2048)
    run.add_argument("--out")
    run.set_defaults(func=cmd_run)

    b = sub.add_parser("bench", help="single-segment timing and traffic benchmark")
    b.add_argument("--role", choices=("alice", "bob"), help="two-host mode; default is in-process loopback")
    b.add_argument("--listen", type=_address)
    b.add_argument("--connect", type=_address)
    b.add_argument("--trials", type=int, default=30)
    b.add_argument("--seed", type=int)
    b.add_argument("--coord-range", type=_coord_range, default=(-99, 99))
    b.add_argument("--key-bits", type=int, default=2048)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)

    s = sub.add_parser("sim", help="flight simulation with deconfliction")
    s.add_argument("--config", required=True)
    s.add_argument("--log-every", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sim)

    p = sub.add_parser("probe", help="raster-probe attack cost against a route")
    p.add_argument("--config", required=True)
    p.add_argument("--path", required=True, help="Bob's route")
    p.add_argument("--key-bits", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_probe)

    k = sub.add_parser("keygen", help="write a key pair file")
    k.add_argument("--key-bits", type=int, default=2048)
    k.add_argument("--out", required=True)
    k.set_defaults(func=cmd_keygen)
    return parser


def _glue_ranges(argv: list[str]) -> list[str]:
    # argparse takes "-99:99" for an option flag; bind it to --coord-range
    out = []
    it = iter(argv)
    for a in it:
        if a == "--coord-range":
            out.append(f"{a}={next(it, '')}")
        else:
            out.append(a)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_glue_ranges(argv))
    try:
        return args.func(args)
    except (ProtocolError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
