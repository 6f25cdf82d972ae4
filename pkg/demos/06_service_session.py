"""Drive the local JSON service end to end.

Starts the service in-process on an ephemeral port and walks the same
debugging story over HTTP: exactly what the web frontend does.
"""

import json
import os
import threading
import urllib.request

from reactsyn.service import Service, make_server

SPEC = os.path.join(os.path.dirname(__file__), "..", "specs", "jukebox_bug.tsl")

server = make_server(Service(), port=0)
host, port = server.server_address[:2]
threading.Thread(target=server.serve_forever, daemon=True).start()
base = f"http://{host}:{port}"
print("service at", base)


def post(path, body):
    req = urllib.request.Request(
        base + path,
        data=json.dumps(body).encode(),
        headers={"Content-Type": "application/json"},
    )
    try:
        with urllib.request.urlopen(req) as resp:
            return json.loads(resp.read())
    except urllib.error.HTTPError as e:
        return json.loads(e.read())


project = post("/api/project/create", {"paths": [SPEC]})
pid = project["project_id"]
print("magic sites:", [s["task"] for s in project["magic_sites"]])

verdict = post("/api/project/solve", {"project_id": pid})
print("realizable:", verdict["realizable"], "| stats:", verdict["stats"])

session = post("/api/session/create", {"project_id": pid})
sid = session["session_id"]
body = {"project_id": pid, "session_id": sid}
print("root:", {k: v["text"] for k, v in session["root"]["state"]["values"].items()})

step = post("/api/session/env-step", body)
print("engine move:", step["edge"]["move"])
print("at magic site:", step["node"]["state"]["at_magic_site"])

act = post("/api/session/user-action", {**body, "action": "jb.cmd_put()"})
print("after cmd_put:", {k: v["text"] for k, v in act["node"]["state"]["values"].items()})

bad = post("/api/session/user-action", {**body, "action": "jb.cmd_play()"})
print("cmd_play response:", bad.get("violation") or bad)

trace = post("/api/session/trace", body)
print(f"trace: {len(trace['nodes'])} nodes, {len(trace['edges'])} edges")

server.shutdown()
