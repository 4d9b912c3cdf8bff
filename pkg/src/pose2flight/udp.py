"""UDP front end for the simulated drone.

Command datagrams arrive on the command port and are answered to the
sender; motion commands answer once the move completes, like the real
SDK. After a client sends "command", state-string telemetry is pushed
to that client's host on the telemetry port at 10 Hz. The server owns
the simulator clock, ticking it in real time.
"""

from __future__ import annotations

import socket
import threading
import time
from typing import Optional

from .sim import DroneSim

TELEMETRY_PERIOD_S = 0.1
TICK_S = 0.02


class UdpDroneServer:
    def __init__(
        self,
        sim: Optional[DroneSim] = None,
        port: int = 8889,
        telemetry_port: int = 8890,
        host: str = "127.0.0.1",
    ):
        self.sim = sim or DroneSim()
        self.lock = threading.Lock()
        self.telemetry_port = telemetry_port
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._sock.bind((host, port))
        self._sock.settimeout(0.05)
        self.port = self._sock.getsockname()[1]
        self._client: Optional[str] = None
        self._pending_addr = None
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []

    def start(self):
        for fn in (self._recv_loop, self._tick_loop):
            t = threading.Thread(target=fn, daemon=True)
            t.start()
            self._threads.append(t)

    def stop(self):
        self._stop.set()
        for t in self._threads:
            t.join(timeout=1.0)
        self._sock.close()

    def _recv_loop(self):
        while not self._stop.is_set():
            try:
                data, addr = self._sock.recvfrom(1024)
            except socket.timeout:
                continue
            except OSError:
                return
            text = data.decode("ascii", errors="replace")
            with self.lock:
                reply = self.sim.submit(text)
            if text.strip() == "command" and reply == "ok":
                self._client = addr[0]
            if reply is not None:
                self._sock.sendto(reply.encode("ascii"), addr)
            else:
                self._pending_addr = addr

    def _tick_loop(self):
        last_telemetry = 0.0
        telemetry_sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        while not self._stop.is_set():
            time.sleep(TICK_S)
            with self.lock:
                done = self.sim.tick(TICK_S * 1000.0)
            for reply in done:
                if self._pending_addr is not None:
                    self._sock.sendto(reply.encode("ascii"), self._pending_addr)
                    self._pending_addr = None
            now = time.monotonic()
            if self._client and now - last_telemetry >= TELEMETRY_PERIOD_S:
                last_telemetry = now
                with self.lock:
                    line = self.sim.telemetry()
                try:
                    telemetry_sock.sendto(line.encode("ascii"), (self._client, self.telemetry_port))
                except OSError:
                    pass
        telemetry_sock.close()
