"""Project management and the local JSON service.

A project owns one compiled specification, its solved game (certificates
cached on disk, keyed by a content hash of the sources), the partial
implementation being filled, and any number of debugging sessions.
The HTTP service exposes the documented endpoints over a local socket;
requests for one project are serialised through its lock, while distinct
projects proceed concurrently.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from . import __version__, debugger
from .bdd import CapacityError, FALSE
from .c_backend import EmitError, emit_c
from .cfa import build_cfa
from .codegen import CodegenError, Generator, PartialImpl, apply_fill
from .diagnostics import SourceError
from .encode import encode_game, game_stats
from .frontend import SourceSpec, compile_model
from .solver import SpoilingCert, WinningCert, solve, verify_strategy

CACHE_FORMAT = 1


class ServiceError(Exception):
    def __init__(self, kind: str, message: str, status: int = 400, extra=None):
        super().__init__(message)
        self.kind = kind
        self.status = status
        self.extra = extra or {}

    def payload(self) -> dict:
        return {"error": {"type": self.kind, "message": str(self), **self.extra}}


def _wrap_error(e: Exception) -> ServiceError:
    if isinstance(e, ServiceError):
        return e
    if isinstance(e, debugger.DebuggerError):
        return ServiceError(e.kind, str(e))
    if isinstance(e, CodegenError):
        extra = {}
        violation = getattr(e, "violation", None)
        if violation is not None:
            extra["violation"] = violation.to_json()
        return ServiceError("codegen", e.message, extra=extra)
    if isinstance(e, EmitError):
        return ServiceError("emit", e.message)
    if isinstance(e, CapacityError):
        return ServiceError("capacity", str(e), status=507)
    if isinstance(e, SourceError):
        return ServiceError(
            "compile",
            e.message,
            extra={"diagnostics": [str(e.diagnostic())]},
        )
    raise e


class Project:
    def __init__(
        self,
        files: list[tuple[str, str]],
        entry: str = "main",
        goals: list[str] | None = None,
        cache_dir: str | None = None,
    ):
        self.lock = threading.RLock()
        self.files = list(files)
        self.entry = entry
        self.goals = goals
        self.cache_dir = cache_dir
        self.model = compile_model(SourceSpec(tuple(files), entry))
        self.cfaset = build_cfa(self.model)
        self.game = encode_game(self.model, self.cfaset, goal_names=goals)
        self.impl = PartialImpl(self.model)
        self.cert = None
        self.sessions: dict[int, debugger.Session] = {}
        self._session_seq = 0
        self._generator: Generator | None = None

    # -- solving with the on-disk certificate cache ---------------------

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(f"v{CACHE_FORMAT};entry={self.entry};goals={self.goals}".encode())
        for path, text in self.files:
            h.update(b"\x00")
            h.update(text.encode())
        return h.hexdigest()

    def solve(self) -> dict:
        with self.lock:
            if self.cert is None:
                self.cert = self._load_cached() or solve(self.game)
                self._store_cached()
            realizable = isinstance(self.cert, WinningCert)
            return {
                "realizable": realizable,
                "stats": self.cert.stats.to_json(),
                "game": game_stats(self.game),
            }

    def _cache_path(self) -> str | None:
        if not self.cache_dir:
            return None
        return os.path.join(self.cache_dir, self.content_hash() + ".cert.json")

    def _load_cached(self):
        path = self._cache_path()
        if not path or not os.path.exists(path):
            return None
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        mgr = self.game.mgr
        if data["kind"] == "winning":
            flat = mgr.load_nodes(data["nodes"])
            cur = iter(flat)
            winning = next(cur)
            rings = [[next(cur) for _ in range(n)] for n in data["ring_shape"]]
            xsets = [
                [[next(cur) for _ in range(k)] for k in shape]
                for shape in data["xset_shape"]
            ]
            strategy = [next(cur) for _ in range(data["n_strategies"])]
            from .solver import SolveStats

            stats = SolveStats(realizable=True)
            return WinningCert(winning, rings, xsets, strategy, stats)
        flat = mgr.load_nodes(data["nodes"])
        cur = iter(flat)
        w_env = next(cur)
        counter = next(cur)
        traps = [next(cur) for _ in range(data["n_traps"])]
        rings = [[next(cur) for _ in range(n)] for n in data["ring_shape"]]
        from .solver import SolveStats

        return SpoilingCert(w_env, counter, traps, rings, SolveStats(False))

    def _store_cached(self) -> None:
        path = self._cache_path()
        if not path or self.cert is None or os.path.exists(path):
            return
        os.makedirs(self.cache_dir, exist_ok=True)
        mgr = self.game.mgr
        cert = self.cert
        if isinstance(cert, WinningCert):
            roots = [cert.winning]
            ring_shape = [len(r) for r in cert.rings]
            for r in cert.rings:
                roots.extend(r)
            xset_shape = [[len(xs) for xs in goal] for goal in cert.xsets]
            for goal in cert.xsets:
                for xs in goal:
                    roots.extend(xs)
            roots.extend(cert.strategy)
            data = {
                "kind": "winning",
                "ring_shape": ring_shape,
                "xset_shape": xset_shape,
                "n_strategies": len(cert.strategy),
                "nodes": mgr.dump_nodes(roots),
            }
        else:
            roots = [cert.w_env, cert.counter_moves] + cert.traps
            ring_shape = [len(r) for r in cert.attractor_rings]
            for r in cert.attractor_rings:
                roots.extend(r)
            data = {
                "kind": "spoiling",
                "n_traps": len(cert.traps),
                "ring_shape": ring_shape,
                "nodes": mgr.dump_nodes(roots),
            }
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(data, fh)
        os.replace(tmp, path)

    # -- sessions ---------------------------------------------------------

    def create_session(self, mode: str) -> tuple[int, debugger.Session]:
        with self.lock:
            self.solve()
            session = debugger.start(self.game, self.cert, mode)
            sid = self._session_seq
            self._session_seq += 1
            self.sessions[sid] = session
            return sid, session

    def session(self, sid: int) -> debugger.Session:
        session = self.sessions.get(sid)
        if session is None:
            raise ServiceError("unknown-session", f"no session {sid}", 404)
        return session

    # -- code generation ----------------------------------------------------

    def generator(self) -> Generator:
        with self.lock:
            self.solve()
            if not isinstance(self.cert, WinningCert):
                raise ServiceError(
                    "unrealizable",
                    "cannot generate code for an unrealizable specification",
                )
            if self._generator is None:
                self._generator = Generator(self.game, self.cert, self.impl)
            return self._generator


@dataclass
class Service:
    cache_dir: str | None = None
    projects: dict[int, Project] = field(default_factory=dict)
    _seq: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock)

    # each handler takes the request body and returns the response body

    def create_project(self, body: dict) -> dict:
        files = []
        for f in body.get("paths", []):
            with open(f, encoding="utf-8") as fh:
                files.append((f, fh.read()))
        for f in body.get("files", []):
            files.append((f["path"], f["text"]))
        if not files:
            raise ServiceError("bad-request", "no input files")
        project = Project(
            files,
            entry=body.get("entry", "main"),
            goals=body.get("goals"),
            cache_dir=body.get("cache_dir", self.cache_dir),
        )
        with self._lock:
            pid = self._seq
            self._seq += 1
            self.projects[pid] = project
        return {
            "project_id": pid,
            "game": game_stats(project.game),
            "magic_sites": [
                {
                    "site": s.site,
                    "task": s.task,
                    "pos": {"file": s.pos.file, "line": s.pos.line, "col": s.pos.col},
                }
                for s in project.model.magic_sites
            ],
            "controllable_tasks": [
                {
                    "name": t.name,
                    "params": [
                        {"name": n, "type": str(ty), "width": ty.width}
                        for n, ty in t.params
                    ],
                }
                for t in project.model.controllable_tasks()
            ],
            "files": [{"path": p, "text": text} for p, text in project.files],
        }

    def project(self, body: dict) -> Project:
        pid = body.get("project_id")
        project = self.projects.get(pid)
        if project is None:
            raise ServiceError("unknown-project", f"no project {pid}", 404)
        return project

    def solve(self, body: dict) -> dict:
        return self.project(body).solve()

    def verify(self, body: dict) -> dict:
        project = self.project(body)
        with project.lock:
            project.solve()
            if not isinstance(project.cert, WinningCert):
                raise ServiceError("unrealizable", "no winning certificate")
            return verify_strategy(project.game, project.cert)

    def create_session(self, body: dict) -> dict:
        project = self.project(body)
        mode = body.get("mode", debugger.COUNTEREXAMPLE)
        sid, session = project.create_session(mode)
        return {
            "session_id": sid,
            "mode": mode,
            "root": session.node_json(session.nodes[0]),
        }

    def _session(self, body: dict) -> tuple[Project, debugger.Session]:
        project = self.project(body)
        return project, project.session(body.get("session_id"))

    def env_step(self, body: dict) -> dict:
        project, session = self._session(body)
        with project.lock:
            result = session.env_step()
            return self._step_payload(session, result)

    def user_action(self, body: dict) -> dict:
        project, session = self._session(body)
        with project.lock:
            result = session.user_action(body["action"])
            return self._step_payload(session, result)

    def _step_payload(self, session, result) -> dict:
        out = {
            "node": session.node_json(result.node),
            "edge": {
                "id": result.edge.id,
                "src": result.edge.src,
                "dst": result.edge.dst,
                "move": result.edge.move,
            },
            "active": session.active,
        }
        if result.violation is not None:
            out["violation"] = result.violation.to_json()
        return out

    def single_step(self, body: dict) -> dict:
        project, session = self._session(body)
        with project.lock:
            if "edge" in body:
                session.replay_edge(body["edge"])
            event = session.single_step()
            if event is None:
                return {"done": True}
            return {"done": False, "event": event.to_json()}

    def goto_node(self, body: dict) -> dict:
        project, session = self._session(body)
        with project.lock:
            node = session.goto_node(body["node"])
            return {"active": node.id, "node": session.node_json(node)}

    def trace(self, body: dict) -> dict:
        project, session = self._session(body)
        with project.lock:
            return session.trace_json()

    def simulate_reachable(self, body: dict) -> dict:
        project = self.project(body)
        with project.lock:
            gen = project.generator()
            reach = gen.simulate_reachable(body["site"])
            empty = reach.r_l == FALSE
            return {
                "site": body["site"],
                "empty": empty,
                "sat_count": 0
                if empty
                else project.game.mgr.sat_count(
                    reach.r_l, project.game.varmap.x_levels
                ),
            }

    def generate_statement(self, body: dict) -> dict:
        project = self.project(body)
        with project.lock:
            gen = project.generator()
            patch, reach = gen.generate(body["site"])
            out = patch.to_json()
            out["unreachable"] = reach.r_l == FALSE
            return {"patch": out}

    def apply_patch(self, body: dict) -> dict:
        project = self.project(body)
        with project.lock:
            apply_fill(
                project.impl,
                body["site"],
                body["text"],
                origin=body.get("origin", "generated"),
            )
            return {
                "open_sites": project.impl.open_sites(),
                "fills": {
                    str(site): {"origin": f.origin, "text": f.text}
                    for site, f in project.impl.fills.items()
                },
            }

    def emit_c(self, body: dict) -> dict:
        project = self.project(body)
        with project.lock:
            gen = project.generator()
            reach = gen.simulate_reachable(
                project.model.magic_sites[0].site, reopen=False
            ) if project.model.magic_sites else None
            if reach is not None:
                violation = gen.check_winning(reach)
                if violation is not None:
                    raise ServiceError(
                        "codegen",
                        "implementation reaches a losing state",
                        extra={"violation": violation.to_json()},
                    )
            mod = emit_c(project.impl, body.get("module", "controller"))
            return {
                "module": mod.name,
                "header": mod.header,
                "source": mod.source,
                "env_fields": [list(f) for f in mod.env_fields],
                "callbacks": [
                    [c, t, list(w)] for c, t, w in mod.callbacks
                ],
                "handlers": [list(h) for h in mod.handlers],
            }

    def ping(self, body: dict) -> dict:
        return {"ok": True, "version": __version__}


ROUTES = {
    "/api/project/create": Service.create_project,
    "/api/project/solve": Service.solve,
    "/api/project/verify": Service.verify,
    "/api/session/create": Service.create_session,
    "/api/session/env-step": Service.env_step,
    "/api/session/user-action": Service.user_action,
    "/api/session/single-step": Service.single_step,
    "/api/session/goto-node": Service.goto_node,
    "/api/session/trace": Service.trace,
    "/api/codegen/simulate-reachable": Service.simulate_reachable,
    "/api/codegen/generate-statement": Service.generate_statement,
    "/api/codegen/apply-patch": Service.apply_patch,
    "/api/codegen/emit-c": Service.emit_c,
    "/api/ping": Service.ping,
}


def make_server(service: Service, host: str = "127.0.0.1", port: int = 0):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, *args):  # quiet by default
            pass

        def _send(self, status: int, payload: dict) -> None:
            body = json.dumps(payload).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def do_OPTIONS(self):
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Access-Control-Allow-Methods", "POST, GET, OPTIONS")
            self.end_headers()

        def do_GET(self):
            if self.path == "/api/ping":
                self._send(200, service.ping({}))
            else:
                self._send(404, {"error": {"type": "not-found", "message": self.path}})

        def do_POST(self):
            route = ROUTES.get(self.path)
            if route is None:
                self._send(404, {"error": {"type": "not-found", "message": self.path}})
                return
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length) if length else b"{}"
            try:
                body = json.loads(raw.decode() or "{}")
            except json.JSONDecodeError:
                self._send(400, {"error": {"type": "bad-json", "message": "bad body"}})
                return
            try:
                payload = route(service, body)
            except Exception as e:  # noqa: BLE001 - mapped to wire errors
                try:
                    err = _wrap_error(e)
                except Exception:
                    raise
                self._send(err.status, err.payload())
                return
            self._send(200, payload)

    return ThreadingHTTPServer((host, port), Handler)


def serve(host: str = "127.0.0.1", port: int = 4780, cache_dir: str | None = None):
    server = make_server(Service(cache_dir=cache_dir), host, port)
    return server
