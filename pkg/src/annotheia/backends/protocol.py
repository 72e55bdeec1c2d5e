"""Newline-delimited JSON over stdio: the contract for model backends.

Requests are single UTF-8 JSON lines written to the backend's stdin with a
monotonically increasing integer id; replies come back on stdout as
{"id": n, "result": ...} or {"id": n, "error": {"code": int, "message": str}}
and are correlated by id, never by arrival order. Backend stderr is captured
into the pipeline log. Heavy payloads travel by scratch-file path.
"""

from __future__ import annotations

import json
import logging
import shlex
import subprocess
import threading

log = logging.getLogger("annotheia.backend")

PROTOCOL_VERSION = 1
HANDSHAKE_TIMEOUT = 30.0
REQUEST_TIMEOUT = 120.0
SHUTDOWN_GRACE = 5.0

BACKEND_KINDS = ("face", "landmarks", "asd", "asr")


class BackendError(Exception):
    pass


class SpawnError(BackendError):
    pass


class ProtocolError(BackendError):
    """Malformed traffic, id mismatch, EOF, or timeout."""


class BackendCallError(BackendError):
    """The backend answered with an error object."""

    def __init__(self, code, message):
        super().__init__(f"backend error {code}: {message}")
        self.code = code
        self.message = message


class BackendHandle:
    """One backend child process; thread-safe for concurrent callers."""

    def __init__(self, process, kind, command, request_timeout=REQUEST_TIMEOUT):
        self.process = process
        self.kind = kind
        self.command = command
        self.request_timeout = request_timeout
        self.capabilities = {}
        self.protocol_version = None
        self._next_id = 0
        self._id_lock = threading.Lock()
        self._write_lock = threading.Lock()
        self._cond = threading.Condition()
        self._replies = {}
        self._dead = None  # error message once the stream is unusable
        self._closed = False
        self._inflight = None  # set after handshake from capabilities
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        self._stderr = threading.Thread(target=self._stderr_loop, daemon=True)
        self._stderr.start()

    # -- plumbing ------------------------------------------------------------

    def _read_loop(self):
        try:
            for line in self.process.stdout:
                line = line.strip()
                if not line:
                    continue
                try:
                    message = json.loads(line)
                except json.JSONDecodeError:
                    self._fail(f"malformed JSON from backend: {line[:200]!r}")
                    return
                if not isinstance(message, dict) or "id" not in message:
                    self._fail(f"reply without id: {line[:200]!r}")
                    return
                with self._cond:
                    self._replies[message["id"]] = message
                    self._cond.notify_all()
        except ValueError:
            pass  # stream closed mid-read during shutdown
        self._fail("backend closed its stdout")

    def _stderr_loop(self):
        try:
            for line in self.process.stderr:
                log.info("[%s] %s", self.kind, line.rstrip())
        except ValueError:
            pass

    def _fail(self, reason):
        with self._cond:
            if self._dead is None:
                self._dead = reason
            self._cond.notify_all()

    def _take_id(self):
        with self._id_lock:
            value = self._next_id
            self._next_id += 1
            return value

    # -- API -----------------------------------------------------------------

    def call(self, method, params=None, timeout=None):
        if self._closed:
            raise ProtocolError("backend already shut down")
        timeout = self.request_timeout if timeout is None else timeout
        request_id = self._take_id()
        payload = json.dumps(
            {"id": request_id, "method": method, "params": params or {}},
            ensure_ascii=False,
        )
        if self._inflight is not None:
            self._inflight.acquire()
        try:
            with self._write_lock:
                if self._dead is not None:
                    raise ProtocolError(self._dead)
                try:
                    self.process.stdin.write(payload + "\n")
                    self.process.stdin.flush()
                except (BrokenPipeError, OSError) as exc:
                    raise ProtocolError(f"backend stdin closed: {exc}") from None
            with self._cond:
                ok = self._cond.wait_for(
                    lambda: request_id in self._replies or self._dead is not None,
                    timeout=timeout,
                )
                if request_id in self._replies:
                    reply = self._replies.pop(request_id)
                elif self._dead is not None:
                    raise ProtocolError(self._dead)
                elif not ok:
                    raise ProtocolError(
                        f"timeout after {timeout:.0f} s waiting for {method} reply"
                    )
        finally:
            if self._inflight is not None:
                self._inflight.release()
        if "error" in reply:
            err = reply["error"] or {}
            raise BackendCallError(err.get("code", -1), err.get("message", "unknown"))
        if "result" not in reply:
            raise ProtocolError(f"reply {request_id} carries neither result nor error")
        return reply["result"]

    def shutdown(self, grace=SHUTDOWN_GRACE):
        """Idempotent; asks politely, then kills."""
        if self._closed:
            return
        self._closed = True
        try:
            with self._write_lock:
                self.process.stdin.write(json.dumps({"method": "shutdown"}) + "\n")
                self.process.stdin.flush()
                self.process.stdin.close()
        except (BrokenPipeError, OSError, ValueError):
            pass
        try:
            self.process.wait(timeout=grace)
        except subprocess.TimeoutExpired:
            self.process.kill()
            self.process.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.shutdown()


def spawn(command, kind, handshake_timeout=HANDSHAKE_TIMEOUT,
          request_timeout=REQUEST_TIMEOUT) -> BackendHandle:
    """Start a backend process and perform the hello handshake."""
    if kind not in BACKEND_KINDS:
        raise ValueError(f"kind must be one of {BACKEND_KINDS}, got {kind!r}")
    argv = shlex.split(command) if isinstance(command, str) else list(command)
    try:
        process = subprocess.Popen(
            argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
    except (FileNotFoundError, PermissionError) as exc:
        raise SpawnError(f"cannot start backend {argv[0]!r}: {exc}") from None

    handle = BackendHandle(process, kind, argv, request_timeout=request_timeout)
    try:
        result = handle.call(
            "hello",
            {"protocol": PROTOCOL_VERSION, "kind": kind},
            timeout=handshake_timeout,
        )
    except BackendError as exc:
        handle.shutdown(grace=1.0)
        raise SpawnError(f"handshake with {argv[0]!r} failed: {exc}") from None
    version = result.get("protocol") if isinstance(result, dict) else None
    if version != PROTOCOL_VERSION:
        handle.shutdown(grace=1.0)
        raise SpawnError(
            f"backend speaks protocol {version}, expected {PROTOCOL_VERSION}"
        )
    handle.protocol_version = version
    handle.capabilities = result.get("capabilities", {}) or {}
    max_inflight = int(handle.capabilities.get("max_inflight", 1))
    if max_inflight > 0:
        handle._inflight = threading.BoundedSemaphore(max_inflight)
    return handle
