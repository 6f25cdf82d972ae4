"""Command line entry points: synth, debug, serve, emit-c."""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import debugger
from .bdd import CapacityError
from .c_backend import emit_c
from .diagnostics import SourceError
from .encode import game_stats
from .service import Project, Service, ServiceError, make_server
from .solver import WinningCert

EXIT_OK = 0
EXIT_COMPILE = 1
EXIT_UNREALIZABLE = 2
EXIT_CAPACITY = 3


def _load_project(args) -> Project:
    files = []
    for path in args.spec:
        with open(path, encoding="utf-8") as fh:
            files.append((path, fh.read()))
    goals = [args.goal] if getattr(args, "goal", None) else None
    return Project(
        files,
        entry=args.entry,
        goals=goals,
        cache_dir=getattr(args, "cache_dir", None),
    )


def _module_name(args) -> str:
    base = os.path.splitext(os.path.basename(args.spec[0]))[0]
    return args.module or f"{base}_ctl"


def cmd_synth(args) -> int:
    try:
        project = _load_project(args)
    except SourceError as e:
        print(e.diagnostic(), file=sys.stderr)
        return EXIT_COMPILE
    except OSError as e:
        print(f"error {e}", file=sys.stderr)
        return EXIT_COMPILE
    if args.dump_game:
        print(json.dumps(game_stats(project.game), indent=2))
    if getattr(args, "dump_cfa", False):
        from .cfa import cfa_to_dot

        for cfa in project.cfaset.cfas:
            print(cfa_to_dot(cfa))
    try:
        verdict = project.solve()
    except CapacityError as e:
        print(f"error <capacity> {e}", file=sys.stderr)
        return EXIT_CAPACITY
    print(json.dumps({"realizable": verdict["realizable"], **verdict["stats"]}))
    out_dir = args.out or os.path.dirname(os.path.abspath(args.spec[0]))
    os.makedirs(out_dir, exist_ok=True)
    base = os.path.splitext(os.path.basename(args.spec[0]))[0]
    if not verdict["realizable"]:
        counter_path = os.path.join(out_dir, f"{base}.counter.json")
        cert = project.cert
        payload = {
            "kind": "counterstrategy",
            "stats": cert.stats.to_json(),
            "nodes": project.game.mgr.dump_nodes([cert.w_env, cert.counter_moves]),
        }
        with open(counter_path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)
        print(f"unrealizable; counterstrategy written to {counter_path}")
        return EXIT_UNREALIZABLE
    cert_path = os.path.join(out_dir, f"{base}.cert.json")
    cert = project.cert
    with open(cert_path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "kind": "strategy",
                "stats": cert.stats.to_json(),
                "nodes": project.game.mgr.dump_nodes(
                    [cert.winning] + cert.strategy
                ),
            },
            fh,
        )
    print(f"certificate written to {cert_path}")
    if not args.auto:
        return EXIT_OK
    try:
        gen = project.generator()
        patches = gen.auto_generate_all()
        for patch in patches:
            site = project.model.magic_sites[patch.site]
            head = f"// {site.task}"
            body = patch.text if not patch.empty else "; (no action needed)"
            print(f"{head}: {body}")
        mod = emit_c(project.impl, _module_name(args))
    except (ServiceError, SourceError) as e:
        print(f"error {e}", file=sys.stderr)
        return EXIT_COMPILE
    c_path = os.path.join(out_dir, f"{mod.name}.c")
    h_path = os.path.join(out_dir, f"{mod.name}.h")
    with open(c_path, "w", encoding="utf-8") as fh:
        fh.write(mod.source)
    with open(h_path, "w", encoding="utf-8") as fh:
        fh.write(mod.header)
    print(f"controller written to {c_path} and {h_path}")
    return EXIT_OK


def cmd_emit_c(args) -> int:
    args.auto = True
    args.dump_game = False
    return cmd_synth(args)


def cmd_serve(args) -> int:
    server = make_server(
        Service(cache_dir=args.cache_dir), host=args.host, port=args.port
    )
    host, port = server.server_address[:2]
    print(f"listening on http://{host}:{port}/api")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return EXIT_OK


HELP = """commands:
  step           let the engine take one environment move
  act CODE       controller action, e.g.  act jb.cmd_put()   or  act exit
  sstep [EDGE]   single-step the last (or a chosen) transition's statements
  state          show the active node's variables
  trace          list explored nodes and edges
  goto N         re-activate node N
  quit
"""


def cmd_debug(args) -> int:
    try:
        project = _load_project(args)
        verdict = project.solve()
    except SourceError as e:
        print(e.diagnostic(), file=sys.stderr)
        return EXIT_COMPILE
    except CapacityError as e:
        print(f"error <capacity> {e}", file=sys.stderr)
        return EXIT_CAPACITY
    mode = debugger.COUNTEREXAMPLE if not verdict["realizable"] else debugger.FREE_PLAY
    print(f"{'counterexample' if mode == debugger.COUNTEREXAMPLE else 'free-play'} "
          f"session; type 'help' for commands")
    session = project.create_session(mode)[1]
    _print_state(session)
    stream = open(args.script) if args.script else sys.stdin
    interactive = stream is sys.stdin
    while True:
        if interactive:
            print("(dbg) ", end="", flush=True)
        line = stream.readline()
        if not line:
            break
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if not interactive:
            print(f"(dbg) {line}")
        try:
            if line == "quit":
                break
            elif line == "help":
                print(HELP, end="")
            elif line == "step":
                result = session.env_step()
                _print_step(session, result)
            elif line.startswith("act"):
                result = session.user_action(line[3:].strip())
                _print_step(session, result)
            elif line.startswith("sstep"):
                arg = line[5:].strip()
                if arg:
                    session.replay_edge(int(arg))
                event = session.single_step()
                if event is None:
                    print("  (replay exhausted)")
                else:
                    print(f"  {_fmt_event(event)}")
            elif line == "state":
                _print_state(session)
            elif line == "trace":
                for node in session.nodes:
                    mark = "*" if node.id == session.active else " "
                    print(f" {mark} [{node.id}] {node.label}")
                for edge in session.edges:
                    print(f"    {edge.src} -> {edge.dst}  {edge.move}")
            elif line.startswith("goto"):
                session.goto_node(int(line[4:].strip()))
                _print_state(session)
            else:
                print(f"unknown command {line!r}; type 'help'")
        except debugger.DebuggerError as e:
            print(f"  ! {e}")
    return EXIT_OK


def _fmt_event(event) -> str:
    pos = f"{event.pos}" if event.pos else ""
    return f"{event.kind} {event.detail} {pos}".strip()


def _print_state(session) -> None:
    node = session.nodes[session.active]
    print(f"node [{node.id}] {node.label}")
    for v in session.model.vars:
        print(f"  {v.name} = {session.render_value(v, node.state.values[v.name])}")
    at = session.at_magic()
    if at is not None:
        site = session.model.magic_sites[at[1].site]
        print(f"  >> inside magic block of {site.task} ({site.pos})")


def _print_step(session, result) -> None:
    print(f"  move: {result.edge.move}")
    if result.violation is not None:
        v = result.violation
        print(f"  ! assertion violated at {v.pos.file}:{v.pos.line}")
    _print_state(session)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="reactsyn",
        description="controller synthesis from imperative reactive specifications",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, specs=True):
        if specs:
            p.add_argument("spec", nargs="+", help="specification file(s)")
            p.add_argument("--entry", default="main", help="entry template")
            p.add_argument("--goal", default=None, help="restrict to one goal")
        p.add_argument("--cache-dir", default=None, help="certificate cache")

    p = sub.add_parser("synth", help="solve and generate a controller")
    common(p)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--module", default=None, help="C module name")
    p.add_argument("--auto", action=argparse.BooleanOptionalAction, default=True,
                   help="generate all sites and emit C (default)")
    p.add_argument("--dump-game", action="store_true", help="print game statistics")
    p.add_argument("--dump-cfa", action="store_true",
                   help="print the automata as Graphviz text")
    p.add_argument("--seed-policy", choices=["low", "high"], default="low")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("emit-c", help="auto-generate and write the C module")
    common(p)
    p.add_argument("--out", default=None)
    p.add_argument("--module", default=None)
    p.add_argument("--seed-policy", choices=["low", "high"], default="low")
    p.set_defaults(func=cmd_emit_c)

    p = sub.add_parser("debug", help="interactive counterexample debugger")
    common(p)
    p.add_argument("--script", default=None, help="read commands from a file")
    p.add_argument("--seed-policy", choices=["low", "high"], default="low")
    p.set_defaults(func=cmd_debug)

    p = sub.add_parser("serve", help="run the local JSON service")
    common(p, specs=False)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=4780)
    p.set_defaults(func=cmd_serve)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
