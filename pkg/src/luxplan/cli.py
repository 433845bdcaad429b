"""Command line front end.

Three subcommands cover the headless workflows:

* ``simulate`` - run one scene, print the constraint table, exit 0 only
  when every target is met.
* ``guide`` - run an autonomous greedy guidance loop and write the
  resulting design history; the regression surface for the suggestion
  pipeline.
* ``serve`` - start the HTTP service.

Every flag has a config-file equivalent (JSON, keys named like the long
flags with dashes replaced by underscores). Precedence is command line
over config file over built-in default.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .guidance import derive_seed, generate_suggestions
from .metrics import WeightConfig, evaluate
from .provenance import to_dot
from .scene import load as load_scene
from .service import Session, save_session
from .simulation import SimSettings, simulate


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    return json.loads(Path(path).read_text())


def _resolve(cli_value, config: dict, key: str, default):
    """CLI > config file > default."""
    if cli_value is not None:
        return cli_value
    if key in config:
        return config[key]
    return default


def _load_weights(path: str | None, config: dict) -> WeightConfig:
    if path:
        return WeightConfig.from_dict(json.loads(Path(path).read_text()))
    if "weights" in config:
        return WeightConfig.from_dict(config["weights"])
    return WeightConfig()


def _settings(args, config: dict) -> SimSettings:
    return SimSettings(
        bounces=int(_resolve(args.bounces, config, "bounces", 3)),
        resolution=_resolve(args.resolution, config, "resolution", None),
    )


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _format_target(target) -> str:
    if isinstance(target, tuple):
        return f"{target[0]:g}..{target[1]:g}"
    return f"{target:g}"


def cmd_simulate(args) -> int:
    config = _load_config(args.config)
    scene = load_scene(args.scene)
    settings = _settings(args, config)
    weights = _load_weights(args.weights, config)

    light_map = simulate(scene, settings)
    report = evaluate(scene, light_map, weights)

    print(f"{'constraint':<20} {'group':<14} {'object':<14} {'measured':>10} {'target':>12} {'f':>6}")
    for e in report.entries:
        measured = "-" if e.measured is None else f"{e.measured:.2f}"
        print(
            f"{e.kind:<20} {e.group_id:<14} {e.object_id:<14} "
            f"{measured:>10} {_format_target(e.target):>12} {e.fulfillment:>6.3f}"
        )
    print(f"score s = {report.score:.6f}")

    if args.out:
        Path(args.out).write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    if args.dump_map:
        light_map.save_binary(args.dump_map)
    return 0 if report.all_met() else 1


# ---------------------------------------------------------------------------
# guide
# ---------------------------------------------------------------------------


def cmd_guide(args) -> int:
    config = _load_config(args.config)
    scene = load_scene(args.scene)
    settings = _settings(args, config)
    weights = _load_weights(args.weights, config)
    steps = int(_resolve(args.steps, config, "steps", 10))
    seed = int(_resolve(args.seed, config, "seed", 0))
    candidate_resolution = _resolve(
        args.candidate_resolution, config, "candidate_resolution", settings.resolution
    )
    candidate_settings = SimSettings(bounces=settings.bounces, resolution=candidate_resolution)

    session = Session(
        id="cli",
        seed=seed,
        settings=settings,
        candidate_settings=candidate_settings,
        weights=weights,
    )
    light_map = simulate(scene, settings)
    report = evaluate(scene, light_map, weights)
    session.tree.commit(scene, report, label="M", description="Initial state")
    print(f"initial s {report.score:.6f}")

    for step in range(1, steps + 1):
        current = session.tree.selection()
        suggestions = generate_suggestions(
            current.scene,
            weights,
            candidate_settings,
            seed=derive_seed(seed, step),
        )
        for s in suggestions:
            session.tree.add_suggestion(
                current.id,
                s.scene,
                s.report,
                label=s.label,
                description=s.description,
                action=s.edit.to_dict(),
                batch=step,
            )
        # Greedy auto-accept: take the best candidate, but only if it
        # strictly improves the score; otherwise the loop has converged.
        best = max(
            (n for n in session.tree.children(current.id) if n.batch == step),
            key=lambda n: n.score,
            default=None,
        )
        if best is None or best.score <= current.score:
            session.tree.prune_suggestions(before_batch=step + 1)
            print(f"round {step}: no improving suggestion, stopping")
            break
        session.tree.accept(best.id)
        session.tree.prune_suggestions(before_batch=step + 1)
        print(
            f"round {step}: accepted {best.id} [{best.label}] {best.description}  "
            f"s {current.score:.6f} -> {best.score:.6f}"
        )

    final = session.tree.selection()
    print(f"final s {final.score:.6f}")

    if args.out:
        save_session(session, args.out)
    if args.dot:
        Path(args.dot).write_text(to_dot(session.tree))
    return 0


# ---------------------------------------------------------------------------
# serve
# ---------------------------------------------------------------------------


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = _load_config(args.config)
    host = _resolve(args.host, config, "host", "127.0.0.1")
    port = int(_resolve(args.port, config, "port", 8000))
    uvicorn.run(create_app(), host=host, port=port, log_level="warning")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="luxplan", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--bounces", type=int, help="inter-reflection bounces (default 3)")
        p.add_argument(
            "--resolution", type=float, help="patch resolution override in meters"
        )
        p.add_argument("--weights", help="JSON weight config file")

    p_sim = sub.add_parser("simulate", help="simulate one scene and report constraints")
    p_sim.add_argument("scene", help="scene JSON file")
    common(p_sim)
    p_sim.add_argument("--out", help="write the report as JSON")
    p_sim.add_argument("--dump-map", help="write the light map as a .npz archive")
    p_sim.set_defaults(func=cmd_simulate)

    p_guide = sub.add_parser("guide", help="run the greedy guidance loop")
    p_guide.add_argument("scene", help="scene JSON file")
    common(p_guide)
    p_guide.add_argument("--steps", type=int, help="guidance rounds (default 10)")
    p_guide.add_argument("--seed", type=int, help="suggestion seed (default 0)")
    p_guide.add_argument(
        "--candidate-resolution",
        type=float,
        help="coarser patch resolution for candidate previews",
    )
    p_guide.add_argument("--out", help="write the session (tree + settings) as JSON")
    p_guide.add_argument("--dot", help="write the design history as Graphviz DOT")
    p_guide.set_defaults(func=cmd_guide)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--config", help="JSON config file; flags override it")
    p_serve.add_argument("--host")
    p_serve.add_argument("--port", type=int)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
