"""Operator console endpoint: JSON telemetry over WebSocket plus static
asset serving, on a single port.

The console is observe-and-tune only: telemetry pushes are decimated and
dropped when the client is slow, and parameter updates are queued for the
loop to apply at the next tick boundary, so a console (or its absence, or
its death mid-run) never changes the trajectory.
"""

from __future__ import annotations

import base64
import hashlib
import json
import socket
import struct
import threading
import time
from pathlib import Path
from queue import Empty, Queue

from .bridge import PARAM_KEYS

WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

_MIME = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".map": "application/json",
    ".png": "image/png",
    ".svg": "image/svg+xml",
}

_PLACEHOLDER = b"""<!doctype html>
<html><body><h3>ppanav console</h3>
<p>No console assets found. Build the frontend (see frontend/README)
and pass its directory via --assets, or connect to /telemetry directly.</p>
</body></html>"""


def accept_key(client_key: str) -> str:
    digest = hashlib.sha1((client_key + WS_GUID).encode("ascii")).digest()
    return base64.b64encode(digest).decode("ascii")


def ws_encode_text(payload: bytes) -> bytes:
    """Server-to-client text frame (FIN set, unmasked)."""
    n = len(payload)
    if n < 126:
        head = struct.pack("!BB", 0x81, n)
    elif n < 1 << 16:
        head = struct.pack("!BBH", 0x81, 126, n)
    else:
        head = struct.pack("!BBQ", 0x81, 127, n)
    return head + payload


def ws_encode_control(opcode: int, payload: bytes = b"") -> bytes:
    return struct.pack("!BB", 0x80 | opcode, len(payload)) + payload


def ws_read_frame(read_exactly) -> tuple[int, bytes]:
    """Read one client frame via read_exactly(n); returns (opcode, payload)."""
    b0, b1 = read_exactly(2)
    opcode = b0 & 0x0F
    masked = bool(b1 & 0x80)
    n = b1 & 0x7F
    if n == 126:
        (n,) = struct.unpack("!H", read_exactly(2))
    elif n == 127:
        (n,) = struct.unpack("!Q", read_exactly(8))
    if not masked:
        raise ConnectionError("client frames must be masked")
    mask = read_exactly(4)
    data = bytearray(read_exactly(n))
    for i in range(n):
        data[i] ^= mask[i % 4]
    return opcode, bytes(data)


class _Client:
    """One websocket session with a buffered, never-blocking sender."""

    def __init__(self, sock: socket.socket):
        self.sock = sock
        self.lock = threading.Lock()
        self.pending = bytearray()
        self.alive = True

    def try_send(self, frame: bytes, drop_if_busy: bool) -> bool:
        """Queue and flush as much as the socket accepts right now."""
        with self.lock:
            if not self.alive:
                return False
            if self.pending and drop_if_busy:
                self._flush()
                return False  # still draining the previous frame: drop this one
            self.pending.extend(frame)
            self._flush()
            return True

    def _flush(self):
        while self.pending:
            try:
                n = self.sock.send(self.pending)
            except (BlockingIOError, InterruptedError):
                return
            except OSError:
                self.alive = False
                return
            del self.pending[:n]

    def close(self):
        with self.lock:
            self.alive = False
        try:
            self.sock.close()
        except OSError:
            pass


class ConsoleServer:
    """Serves /telemetry websocket sessions and static console assets."""

    def __init__(self, port: int = 0, host: str = "127.0.0.1",
                 assets_dir=None, max_fps: float | None = 15.0):
        self.assets_dir = Path(assets_dir) if assets_dir else None
        self.max_fps = max_fps
        self.params: Queue = Queue()
        self.clients: list[_Client] = []
        self._clients_lock = threading.Lock()
        self._last_push = 0.0
        self._closing = False
        self.listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self.listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self.listener.bind((host, port))
        self.listener.listen(4)
        self.port = self.listener.getsockname()[1]
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._accept_thread.start()

    # -- loop-facing API ----------------------------------------------------

    def push(self, build_payload) -> bool:
        """Send one telemetry message, decimated to max_fps.

        `build_payload` is a zero-argument callable returning the dict, so
        the JSON+base64 work only happens when a send actually goes out.
        """
        with self._clients_lock:
            targets = [c for c in self.clients if c.alive]
        if not targets:
            return False
        now = time.monotonic()
        if self.max_fps is not None and (now - self._last_push) < 1.0 / self.max_fps:
            return False
        self._last_push = now
        frame = ws_encode_text(json.dumps(build_payload()).encode("utf-8"))
        sent = False
        for client in targets:
            sent |= client.try_send(frame, drop_if_busy=True)
        return sent

    def poll_params(self) -> list[tuple[str, float]]:
        out = []
        while True:
            try:
                out.append(self.params.get_nowait())
            except Empty:
                return out

    def close(self):
        self._closing = True
        try:
            self.listener.close()
        except OSError:
            pass
        with self._clients_lock:
            clients, self.clients = self.clients, []
        for c in clients:
            c.close()

    # -- connection handling ------------------------------------------------

    def _accept_loop(self):
        while not self._closing:
            try:
                conn, _ = self.listener.accept()
            except OSError:
                return
            threading.Thread(target=self._handle, args=(conn,), daemon=True).start()

    def _handle(self, conn: socket.socket):
        try:
            request = self._read_head(conn)
            if request is None:
                conn.close()
                return
            method, path, headers = request
            if path.split("?")[0] == "/telemetry" and "websocket" in headers.get("upgrade", ""):
                self._telemetry_session(conn, headers)
            else:
                self._serve_static(conn, method, path)
                conn.close()
        except (OSError, ConnectionError):
            conn.close()

    @staticmethod
    def _read_head(conn) -> tuple[str, str, dict] | None:
        data = b""
        while b"\r\n\r\n" not in data:
            chunk = conn.recv(4096)
            if not chunk:
                return None
            data += chunk
            if len(data) > 65536:
                return None
        head = data.split(b"\r\n\r\n", 1)[0].decode("latin-1")
        lines = head.split("\r\n")
        try:
            method, path, _ = lines[0].split(" ", 2)
        except ValueError:
            return None
        headers = {}
        for line in lines[1:]:
            if ":" in line:
                k, v = line.split(":", 1)
                headers[k.strip().lower()] = v.strip().lower() if k.strip().lower() == "upgrade" else v.strip()
        return method, path, headers

    def _serve_static(self, conn, method: str, path: str):
        if method != "GET":
            conn.sendall(b"HTTP/1.1 405 Method Not Allowed\r\nConnection: close\r\n\r\n")
            return
        name = path.split("?")[0].lstrip("/") or "index.html"
        body, ctype = None, "text/html; charset=utf-8"
        if self.assets_dir is not None:
            candidate = (self.assets_dir / name).resolve()
            root = self.assets_dir.resolve()
            if candidate.is_file() and root in candidate.parents:
                body = candidate.read_bytes()
                ctype = _MIME.get(candidate.suffix, "application/octet-stream")
        if body is None and name == "index.html":
            body = _PLACEHOLDER
        if body is None:
            conn.sendall(b"HTTP/1.1 404 Not Found\r\nConnection: close\r\n\r\n")
            return
        head = (
            f"HTTP/1.1 200 OK\r\nContent-Type: {ctype}\r\n"
            f"Content-Length: {len(body)}\r\nConnection: close\r\n\r\n"
        )
        conn.sendall(head.encode("latin-1") + body)

    def _telemetry_session(self, conn: socket.socket, headers: dict):
        key = headers.get("sec-websocket-key")
        if not key:
            conn.sendall(b"HTTP/1.1 400 Bad Request\r\n\r\n")
            conn.close()
            return
        conn.sendall(
            (
                "HTTP/1.1 101 Switching Protocols\r\n"
                "Upgrade: websocket\r\nConnection: Upgrade\r\n"
                f"Sec-WebSocket-Accept: {accept_key(key)}\r\n\r\n"
            ).encode("latin-1")
        )
        conn.setblocking(False)
        client = _Client(conn)
        with self._clients_lock:
            self.clients.append(client)
        try:
            self._reader(conn, client)
        finally:
            with self._clients_lock:
                if client in self.clients:
                    self.clients.remove(client)
            client.close()

    def _reader(self, conn: socket.socket, client: _Client):
        buf = bytearray()

        def read_exactly(n: int) -> bytes:
            while len(buf) < n:
                try:
                    chunk = conn.recv(4096)
                except (BlockingIOError, InterruptedError):
                    time.sleep(0.005)
                    continue
                except OSError:
                    raise ConnectionError("socket gone") from None
                if not chunk:
                    raise ConnectionError("client left")
                buf.extend(chunk)
            out = bytes(buf[:n])
            del buf[:n]
            return out

        while client.alive:
            opcode, payload = ws_read_frame(read_exactly)
            if opcode == 0x8:  # close
                client.try_send(ws_encode_control(0x8), drop_if_busy=False)
                return
            if opcode == 0x9:  # ping
                client.try_send(ws_encode_control(0xA, payload), drop_if_busy=False)
                continue
            if opcode != 0x1:
                continue
            self._on_text(client, payload)

    def _on_text(self, client: _Client, payload: bytes):
        try:
            msg = json.loads(payload)
        except ValueError:
            return
        if not isinstance(msg, dict) or msg.get("type") != "set_param":
            return
        key, value = msg.get("key"), msg.get("value")
        if key not in PARAM_KEYS or not isinstance(value, (int, float)):
            err = {"type": "error", "message": f"unknown or invalid param: {key}"}
            client.try_send(ws_encode_text(json.dumps(err).encode()), drop_if_busy=False)
            return
        self.params.put((key, float(value)))


class ConsoleClient:
    """Small blocking websocket client, used by tests and scripts."""

    def __init__(self, port: int, host: str = "127.0.0.1", timeout: float = 5.0):
        self.sock = socket.create_connection((host, port), timeout=timeout)
        self.sock.settimeout(timeout)
        key = base64.b64encode(b"0123456789abcdef").decode()
        self.sock.sendall(
            (
                f"GET /telemetry HTTP/1.1\r\nHost: {host}:{port}\r\n"
                "Upgrade: websocket\r\nConnection: Upgrade\r\n"
                f"Sec-WebSocket-Key: {key}\r\nSec-WebSocket-Version: 13\r\n\r\n"
            ).encode()
        )
        head = b""
        while b"\r\n\r\n" not in head:
            chunk = self.sock.recv(4096)
            if not chunk:
                raise ConnectionError("handshake failed")
            head += chunk
        status = head.split(b"\r\n", 1)[0]
        if b"101" not in status:
            raise ConnectionError(f"handshake rejected: {status!r}")
        self.buf = bytearray(head.split(b"\r\n\r\n", 1)[1])

    def _read_exactly(self, n: int) -> bytes:
        while len(self.buf) < n:
            chunk = self.sock.recv(65536)
            if not chunk:
                raise ConnectionError("server left")
            self.buf.extend(chunk)
        out = bytes(self.buf[:n])
        del self.buf[:n]
        return out

    def recv_json(self) -> dict:
        while True:
            b0, b1 = self._read_exactly(2)
            opcode = b0 & 0x0F
            n = b1 & 0x7F
            if n == 126:
                (n,) = struct.unpack("!H", self._read_exactly(2))
            elif n == 127:
                (n,) = struct.unpack("!Q", self._read_exactly(8))
            payload = self._read_exactly(n)
            if opcode == 0x1:
                return json.loads(payload)
            if opcode == 0x8:
                raise ConnectionError("server closed the session")

    def send_json(self, obj: dict):
        payload = json.dumps(obj).encode()
        mask = b"\x00\x00\x00\x00"  # mask bit set, zero key keeps payload as-is
        n = len(payload)
        if n < 126:
            head = struct.pack("!BB", 0x81, 0x80 | n)
        elif n < 1 << 16:
            head = struct.pack("!BBH", 0x81, 0x80 | 126, n)
        else:
            head = struct.pack("!BBQ", 0x81, 0x80 | 127, n)
        self.sock.sendall(head + mask + payload)

    def set_param(self, key: str, value: float):
        self.send_json({"type": "set_param", "key": key, "value": value})

    def close(self):
        try:
            self.sock.close()
        except OSError:
            pass
