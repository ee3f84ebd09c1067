"""Command-line front end; a thin client of the HTTP service.

Requests are sent to a running server when --server is given, otherwise to
an in-process instance of the same app, so the CLI and the service share
one code path. Exit codes: 0 success, 1 input error, 2 unreachable face.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path


def _client(server: str | None):
    import httpx
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    from fastapi.testclient import TestClient

    from .api.app import create_app
    return TestClient(create_app())


def _parse_coords(text: str) -> list[float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"expected 'x,y,z', got {text!r}")
    return [float(p) for p in parts]


def _read_scene(path: str) -> dict:
    raw = Path(path).read_text(encoding="utf-8")
    return json.loads(raw)


def _fail(message: str, code: int) -> int:
    print(message, file=sys.stderr)
    return code


def _dispatch_error(resp) -> int:
    try:
        detail = resp.json().get("detail")
    except Exception:
        detail = None
    if isinstance(detail, dict) and "type" in detail:
        message = f"{detail['type']}: {detail.get('message', '')}"
        code = 2 if detail["type"] == "Unreachable" else 1
    else:
        message = f"HTTP {resp.status_code}: {resp.text[:500]}"
        code = 1
    return _fail(message, code)


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _export_obj(waypoints: list[list[float]], path: str) -> None:
    lines = [f"v {p[0]:.12g} {p[1]:.12g} {p[2]:.12g}" for p in waypoints]
    lines.append("l " + " ".join(str(i + 1) for i in range(len(waypoints))))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_solve(args) -> int:
    try:
        payload = {
            "scene": _read_scene(args.scene),
            "source": _parse_coords(args.source),
            "face": args.face,
            "epsilon": args.epsilon,
            "algorithm": args.algorithm,
            "timing": args.timing,
        }
        if args.epsilon1 is not None:
            payload["epsilon1"] = args.epsilon1
        if args.cone_theta is not None:
            payload["cone_theta"] = args.cone_theta
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        return _fail(f"input error: {exc}", 1)
    with _client(args.server) as client:
        resp = client.post("/solve", json=payload)
    if resp.status_code != 200:
        return _dispatch_error(resp)
    _emit(resp.text, args.out)
    if args.export_obj:
        _export_obj(resp.json()["waypoints"], args.export_obj)
    return 0


def cmd_oracle(args) -> int:
    try:
        payload = {
            "scene": _read_scene(args.scene),
            "source": _parse_coords(args.source),
            "face": args.face,
            "oracle": args.oracle,
            "epsilon_oracle": args.epsilon_oracle,
        }
        if args.edges:
            payload["edges"] = [int(e) for e in args.edges.split(",")]
        if args.terminal:
            payload["terminal"] = _parse_coords(args.terminal)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        return _fail(f"input error: {exc}", 1)
    with _client(args.server) as client:
        resp = client.post("/oracle", json=payload)
    if resp.status_code != 200:
        return _dispatch_error(resp)
    _emit(resp.text, args.out)
    return 0


def cmd_bench(args) -> int:
    payload = {
        "seed": args.seed,
        "algorithms": args.algorithms.split(","),
        "epsilons": [float(e) for e in args.epsilons.split(",")],
        "epsilon_oracle": args.epsilon_oracle,
        "timing": args.timing,
    }
    if args.scenes:
        root = Path(args.scenes)
        files = sorted(root.glob("*.json"))
        if not files:
            return _fail(f"no scene files in {args.scenes}", 1)
        scenes = []
        for f in files:
            try:
                spec = json.loads(f.read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError) as exc:
                return _fail(f"input error in {f}: {exc}", 1)
            # Scene files used for bench carry source/face alongside obstacles.
            if "scene" in spec:
                entry = {"label": f.stem, **spec}
            else:
                return _fail(f"{f}: bench scene file needs scene/source/face keys", 1)
            scenes.append(entry)
        payload["scenes"] = scenes
    elif args.random:
        payload["random"] = args.random
    else:
        return _fail("bench needs --scenes DIR or --random N", 1)
    with _client(args.server) as client:
        resp = client.post("/bench", json=payload)
    if resp.status_code != 200:
        return _dispatch_error(resp)
    sys.stdout.write(resp.text)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .api.app import create_app
    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="facepath",
        description="Approximate point-to-face shortest paths among "
                    "3D polyhedral obstacles.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--server", default=None,
                       help="base URL of a running facepath server "
                            "(default: run in-process)")

    p = sub.add_parser("solve", help="compute an approximate path to a face")
    p.add_argument("--scene", required=True, help="scene JSON file")
    p.add_argument("--source", required=True, help="source point 'x,y,z'")
    p.add_argument("--face", required=True, help="face reference 'O:T'")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--algorithm", default="cone",
                   choices=["grid_vg", "wvd", "cone"])
    p.add_argument("--epsilon1", type=float, default=None,
                   help="override the edge-subdivision parameter")
    p.add_argument("--cone-theta", type=float, default=None,
                   help="override the cone half-angle (radians)")
    p.add_argument("--out", default=None, help="write the JSON report here")
    p.add_argument("--export-obj", default=None,
                   help="also write the path polyline as an OBJ file")
    p.add_argument("--timing", action=argparse.BooleanOptionalAction, default=True,
                   help="include wall-clock timing in the report")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="run a reference solver")
    p.add_argument("--scene", required=True)
    p.add_argument("--source", required=True)
    p.add_argument("--face", required=True)
    p.add_argument("--oracle", default="fine",
                   choices=["fine", "unfold", "exhaustive", "unobstructed"])
    p.add_argument("--epsilon-oracle", type=float, default=0.02)
    p.add_argument("--edges", default=None,
                   help="comma-separated edge ids for the unfold oracle")
    p.add_argument("--terminal", default=None,
                   help="terminal point 'x,y,z' for the unfold oracle")
    p.add_argument("--out", default=None)
    common(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="benchmark solvers against the fine oracle")
    p.add_argument("--scenes", default=None, help="directory of bench scene files")
    p.add_argument("--random", type=int, default=None,
                   help="generate N random scenes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--algorithms", default="grid_vg,wvd,cone")
    p.add_argument("--epsilons", default="0.5,0.25")
    p.add_argument("--epsilon-oracle", type=float, default=0.05)
    p.add_argument("--timing", action=argparse.BooleanOptionalAction, default=False)
    common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
