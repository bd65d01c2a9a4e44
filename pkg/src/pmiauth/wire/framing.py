"""
Length-prefixed frames and a small threaded TCP transport.

Frame layout: 4-byte big-endian length of everything that follows, then
a version octet (0x01), a message-type octet, and the payload.
"""

from __future__ import annotations

import enum
import logging
import socket
import socketserver
import struct
import threading
from typing import Callable

from ..errors import CvsTimeout, ProtocolViolation

log = logging.getLogger(__name__)

VERSION = 0x01
MAX_PAYLOAD = 1 << 24
_HEADER = struct.Struct(">IBB")


class MsgType(enum.IntEnum):
    CVS_REQUEST = 0x01
    CVS_RESPONSE = 0x02
    ACCESS_REQUEST = 0x11
    ACCESS_RESPONSE = 0x12
    ERROR = 0x7F


class ErrorReason(enum.IntEnum):
    MALFORMED_FRAME = 1
    BAD_VERSION = 2
    BAD_TYPE = 3
    TOO_LARGE = 4
    BAD_MESSAGE = 5
    BAD_SIGNATURE = 6
    INTERNAL = 7


class FrameError(ProtocolViolation):
    def __init__(self, reason: ErrorReason, message: str):
        super().__init__(message)
        self.reason = reason


def encode_frame(msg_type: int, payload: bytes) -> bytes:
    if len(payload) > MAX_PAYLOAD:
        raise FrameError(ErrorReason.TOO_LARGE, f"payload of {len(payload)} bytes")
    return _HEADER.pack(2 + len(payload), VERSION, msg_type) + payload


def error_frame(reason: ErrorReason) -> bytes:
    return encode_frame(MsgType.ERROR, bytes([reason]))


def _check_header(length: int, version: int):
    if length < 2:
        raise FrameError(ErrorReason.MALFORMED_FRAME, f"frame length {length} too small")
    if length - 2 > MAX_PAYLOAD:
        raise FrameError(ErrorReason.TOO_LARGE, f"frame payload of {length - 2} bytes")
    if version != VERSION:
        raise FrameError(ErrorReason.BAD_VERSION, f"frame version {version}")


def decode_frame(data: bytes) -> tuple[int, bytes]:
    """Decode exactly one frame from a complete buffer."""
    if len(data) < _HEADER.size:
        raise FrameError(ErrorReason.MALFORMED_FRAME, "frame header truncated")
    length, version, msg_type = _HEADER.unpack_from(data)
    _check_header(length, version)
    if len(data) != 4 + length:
        raise FrameError(ErrorReason.MALFORMED_FRAME, "frame length does not match buffer")
    return msg_type, data[_HEADER.size:]


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(min(n - len(buf), 1 << 16))
        if not chunk:
            break
        buf += chunk
    return bytes(buf)


def read_frame(sock: socket.socket) -> tuple[int, bytes] | None:
    """Read one frame; ``None`` on a clean EOF before the first byte."""
    head = _recv_exact(sock, _HEADER.size)
    if not head:
        return None
    if len(head) < _HEADER.size:
        raise FrameError(ErrorReason.MALFORMED_FRAME, "connection closed inside frame header")
    length, version, msg_type = _HEADER.unpack(head)
    _check_header(length, version)
    payload = _recv_exact(sock, length - 2)
    if len(payload) != length - 2:
        raise FrameError(ErrorReason.MALFORMED_FRAME, "connection closed inside frame payload")
    return msg_type, payload


Handler = Callable[[int, bytes], "tuple[int, bytes]"]


class _ThreadingServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True


class FrameServer:
    """Threaded TCP server: one frame in, one frame out, until EOF or an error frame."""

    idle_timeout = 30.0

    def __init__(self, handler: Handler, host: str = "127.0.0.1", port: int = 0):
        self.handler = handler
        outer = self

        class _Conn(socketserver.BaseRequestHandler):
            def handle(self):
                outer._serve_connection(self.request)

        self._server = _ThreadingServer((host, port), _Conn)
        self._thread: threading.Thread | None = None
        self._serving = False

    @property
    def address(self) -> tuple[str, int]:
        return self._server.server_address[:2]

    def _serve_connection(self, sock: socket.socket):
        sock.settimeout(self.idle_timeout)
        try:
            while True:
                try:
                    frame = read_frame(sock)
                except FrameError as exc:
                    log.info("rejecting frame: %s", exc)
                    sock.sendall(error_frame(exc.reason))
                    return
                if frame is None:
                    return
                msg_type, payload = self.handler(*frame)
                sock.sendall(encode_frame(msg_type, payload))
                if msg_type == MsgType.ERROR:
                    return
        except (OSError, socket.timeout) as exc:
            log.debug("connection dropped: %s", exc)

    def start(self) -> "FrameServer":
        self._serving = True
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def serve_forever(self):
        self._serving = True
        self._server.serve_forever()

    def stop(self):
        # shutdown() waits for the serving loop, so only ask when one is running
        if self._serving:
            self._server.shutdown()
            self._serving = False
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()


def exchange(host: str, port: int, msg_type: int, payload: bytes, timeout: float) -> tuple[int, bytes]:
    """Send one frame on a fresh connection and wait for the reply."""
    try:
        with socket.create_connection((host, port), timeout=timeout) as sock:
            sock.settimeout(timeout)
            sock.sendall(encode_frame(msg_type, payload))
            frame = read_frame(sock)
    except socket.timeout as exc:
        raise CvsTimeout(f"no reply from {host}:{port} within {timeout}s") from exc
    if frame is None:
        raise ProtocolViolation("server closed the connection without replying")
    return frame
