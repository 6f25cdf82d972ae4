"""JSON schemas for the wire protocol (mirrors docs/protocol.md)."""

POS = {
    "type": "object",
    "properties": {
        "file": {"type": "string"},
        "line": {"type": "integer"},
        "col": {"type": "integer"},
    },
    "required": ["file", "line", "col"],
}

STATE = {
    "type": "object",
    "properties": {
        "values": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "properties": {
                    "raw": {"type": "integer"},
                    "text": {"type": "string"},
                },
                "required": ["raw", "text"],
            },
        },
        "pcs": {"type": "object", "additionalProperties": {"type": "integer"}},
        "err": {"type": "boolean"},
        "at_magic_site": {"type": ["integer", "null"]},
        "controller_turn": {"type": "boolean"},
    },
    "required": ["values", "pcs", "err", "at_magic_site", "controller_turn"],
}

NODE = {
    "type": "object",
    "properties": {
        "id": {"type": "integer"},
        "label": {"type": "string"},
        "state": STATE,
    },
    "required": ["id", "label", "state"],
}

EDGE = {
    "type": "object",
    "properties": {
        "id": {"type": "integer"},
        "src": {"type": "integer"},
        "dst": {"type": "integer"},
        "move": {"type": "object"},
    },
    "required": ["id", "src", "dst", "move"],
}

STEP = {
    "type": "object",
    "properties": {
        "node": NODE,
        "edge": EDGE,
        "active": {"type": "integer"},
        "violation": {
            "type": "object",
            "properties": {"pos": POS, "message": {"type": "string"}},
            "required": ["pos", "message"],
        },
    },
    "required": ["node", "edge", "active"],
}

TRACE = {
    "type": "object",
    "properties": {
        "mode": {"type": "string"},
        "active": {"type": "integer"},
        "nodes": {"type": "array", "items": NODE},
        "edges": {"type": "array", "items": EDGE},
    },
    "required": ["mode", "active", "nodes", "edges"],
}

SOLVE = {
    "type": "object",
    "properties": {
        "realizable": {"type": "boolean"},
        "stats": {"type": "object"},
        "game": {"type": "object"},
    },
    "required": ["realizable", "stats", "game"],
}

PATCH = {
    "type": "object",
    "properties": {
        "patch": {
            "type": "object",
            "properties": {
                "site": {"type": "integer"},
                "text": {"type": "string"},
                "partitions": {"type": "array"},
                "empty": {"type": "boolean"},
                "unreachable": {"type": "boolean"},
            },
            "required": ["site", "text", "partitions", "empty"],
        }
    },
    "required": ["patch"],
}

EMIT = {
    "type": "object",
    "properties": {
        "module": {"type": "string"},
        "header": {"type": "string"},
        "source": {"type": "string"},
        "env_fields": {"type": "array"},
        "callbacks": {"type": "array"},
        "handlers": {"type": "array"},
    },
    "required": ["module", "header", "source", "env_fields", "callbacks"],
}

ERROR = {
    "type": "object",
    "properties": {
        "error": {
            "type": "object",
            "properties": {
                "type": {"type": "string"},
                "message": {"type": "string"},
            },
            "required": ["type", "message"],
        }
    },
    "required": ["error"],
}

SESSION_CREATE = {
    "type": "object",
    "properties": {
        "session_id": {"type": "integer"},
        "mode": {"type": "string"},
        "root": NODE,
    },
    "required": ["session_id", "mode", "root"],
}
