import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


class MockEndpoint:
    """Local chat-completion server replaying a script of completions."""

    def __init__(self, script=None, default="ANSWER: C", delay=0.0):
        self.script = list(script or [])
        self.default = default
        self.delay = delay
        self.requests = []
        self.in_flight = 0
        self.peak = 0
        self.lock = threading.Lock()
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def do_POST(self):
                body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
                with outer.lock:
                    outer.requests.append((self.path, body))
                    outer.in_flight += 1
                    outer.peak = max(outer.peak, outer.in_flight)
                    item = outer.script.pop(0) if outer.script else outer.default
                time.sleep(outer.delay)
                with outer.lock:
                    outer.in_flight -= 1
                if isinstance(item, int):
                    self.send_response(item)
                    self.end_headers()
                    return
                data = json.dumps({"choices": [{"message": {"role": "assistant", "content": item}}]}).encode()
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.url = f"http://127.0.0.1:{self.server.server_address[1]}/v1"
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)

    def __enter__(self):
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.server.shutdown()
        self.server.server_close()
