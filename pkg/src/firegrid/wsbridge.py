"""Websocket lift of the wire protocol, plus static file serving.

The browser UI cannot open raw TCP sockets, so this module wraps each
websocket text message as one protocol request line and sends the reply
back as one text message; payloads are byte-for-byte the same JSON the
socket transport uses. Framing is the standard websocket handshake and
frame layout, implemented directly since only text frames, ping/pong,
and close are needed.

The same server answers plain GET requests from a static directory so
one process can host both the UI bundle and its backend.
"""

from __future__ import annotations

import base64
import hashlib
from functools import partial
from http.server import SimpleHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .fuels import FuelCatalog, builtin_catalog
from .protocol import ProtocolSession

_HANDSHAKE_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

OP_CONT = 0x0
OP_TEXT = 0x1
OP_BINARY = 0x2
OP_CLOSE = 0x8
OP_PING = 0x9
OP_PONG = 0xA


def accept_key(client_key: str) -> str:
    digest = hashlib.sha1((client_key + _HANDSHAKE_GUID).encode()).digest()
    return base64.b64encode(digest).decode()


def encode_frame(payload: bytes, opcode: int = OP_TEXT,
                 mask: bytes | None = None) -> bytes:
    """One complete frame; mask is required for client-to-server frames."""
    head = bytearray([0x80 | opcode])
    n = len(payload)
    mask_bit = 0x80 if mask is not None else 0
    if n < 126:
        head.append(mask_bit | n)
    elif n < 1 << 16:
        head.append(mask_bit | 126)
        head += n.to_bytes(2, "big")
    else:
        head.append(mask_bit | 127)
        head += n.to_bytes(8, "big")
    if mask is not None:
        head += mask
        payload = _apply_mask(payload, mask)
    return bytes(head) + payload


def _apply_mask(data: bytes, mask: bytes) -> bytes:
    if not data:
        return data
    n = len(data)
    pad = (mask * (n // 4 + 1))[:n]
    value = int.from_bytes(data, "big") ^ int.from_bytes(pad, "big")
    return value.to_bytes(n, "big")


def _read_exact(rfile, n: int) -> bytes:
    chunks = []
    remaining = n
    while remaining:
        chunk = rfile.read(remaining)
        if not chunk:
            raise ConnectionError("websocket peer closed mid-frame")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def read_frame(rfile) -> tuple[bool, int, bytes] | None:
    """-> (fin, opcode, payload) or None on a clean end-of-stream."""
    head = rfile.read(2)
    if not head:
        return None
    if len(head) < 2:
        head += _read_exact(rfile, 1)
    fin = bool(head[0] & 0x80)
    opcode = head[0] & 0x0F
    masked = bool(head[1] & 0x80)
    length = head[1] & 0x7F
    if length == 126:
        length = int.from_bytes(_read_exact(rfile, 2), "big")
    elif length == 127:
        length = int.from_bytes(_read_exact(rfile, 8), "big")
    mask = _read_exact(rfile, 4) if masked else None
    payload = _read_exact(rfile, length) if length else b""
    if mask is not None:
        payload = _apply_mask(payload, mask)
    return fin, opcode, payload


def read_message(rfile, send=None) -> tuple[int, bytes] | None:
    """Reassemble one message, answering pings via send. None at EOF."""
    opcode = None
    parts = []
    while True:
        frame = read_frame(rfile)
        if frame is None:
            return None
        fin, op, payload = frame
        if op == OP_PING:
            if send is not None:
                send(encode_frame(payload, OP_PONG))
            continue
        if op == OP_PONG:
            continue
        if op == OP_CLOSE:
            return OP_CLOSE, payload
        if op != OP_CONT:
            opcode = op
            parts = [payload]
        else:
            parts.append(payload)
        if fin:
            if opcode is None:
                raise ConnectionError("continuation frame without a start")
            return opcode, b"".join(parts)


class BridgeHandler(SimpleHTTPRequestHandler):
    """GET /ws upgrades to a protocol session; anything else is static."""

    protocol_version = "HTTP/1.1"

    def do_GET(self):
        if self.path == self.server.ws_path and self._wants_upgrade():
            self._serve_websocket()
            return
        if self.server.static_dir is None:
            self.send_error(404, "no static bundle configured")
            return
        super().do_GET()

    def _wants_upgrade(self) -> bool:
        connection = self.headers.get("Connection", "")
        upgrade = self.headers.get("Upgrade", "")
        return ("upgrade" in connection.lower()
                and upgrade.lower() == "websocket"
                and self.headers.get("Sec-WebSocket-Key") is not None)

    def _serve_websocket(self):
        key = self.headers["Sec-WebSocket-Key"]
        self.send_response(101, "Switching Protocols")
        self.send_header("Upgrade", "websocket")
        self.send_header("Connection", "Upgrade")
        self.send_header("Sec-WebSocket-Accept", accept_key(key))
        self.end_headers()
        self.close_connection = True

        send = self.connection.sendall
        session = ProtocolSession(self.server.catalog,
                                  self.server.scenario_root)
        try:
            while True:
                message = read_message(self.rfile, send)
                if message is None:
                    return
                opcode, payload = message
                if opcode == OP_CLOSE:
                    send(encode_frame(payload[:2], OP_CLOSE))
                    return
                if opcode != OP_TEXT:
                    continue
                reply = session.handle_line(payload.decode("utf-8"))
                send(encode_frame(reply.encode("utf-8")))
                if session.closed:
                    send(encode_frame(b"\x03\xe8", OP_CLOSE))  # 1000 normal
                    return
        except (ConnectionError, BrokenPipeError, OSError):
            return

    def log_message(self, format, *args):   # quiet by default
        if self.server.verbose:
            super().log_message(format, *args)


class BridgeServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, host: str = "127.0.0.1", port: int = 0,
                 static_dir: str | Path | None = None,
                 catalog: FuelCatalog | None = None,
                 scenario_root=None, ws_path: str = "/ws",
                 verbose: bool = False):
        self.static_dir = str(static_dir) if static_dir is not None else None
        self.catalog = catalog if catalog is not None else builtin_catalog()
        self.scenario_root = scenario_root
        self.ws_path = ws_path
        self.verbose = verbose
        handler = partial(BridgeHandler,
                          directory=self.static_dir or str(Path.cwd()))
        super().__init__((host, port), handler)


def serve_bridge(host: str = "127.0.0.1", port: int = 0,
                 static_dir=None, catalog=None, scenario_root=None,
                 verbose: bool = False) -> BridgeServer:
    """Bind and return the server; caller drives serve_forever()."""
    return BridgeServer(host, port, static_dir, catalog, scenario_root,
                        verbose=verbose)
