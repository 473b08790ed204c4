"""Shim command line: serve the endpoints or record contract fixtures."""

import argparse
import sys


def _build_parser():
    parser = argparse.ArgumentParser(prog="relshim")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--backend", choices=["toy", "real"], default="toy")
    serve.add_argument("--model-path", help="transformers checkpoint for the real backend")
    serve.add_argument("--parser-plugin", help="pkg.module:factory for a real parser")
    serve.add_argument("--device", default="cpu")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8601)

    record = sub.add_parser("record", help="replay a requests file into fixtures")
    record.add_argument("--requests", required=True)
    record.add_argument("--out", required=True)

    return parser


def run(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.subcommand == "serve":
        import uvicorn
        from .app import build_backends, create_app

        try:
            lm, parser = build_backends(args.backend, args.model_path,
                                        args.parser_plugin, args.device)
        except (ValueError, RuntimeError) as exc:
            print(f"startup failure: {exc}", file=sys.stderr)
            return 1
        uvicorn.run(create_app(lm, parser), host=args.host, port=args.port, log_level="warning")
        return 0

    from .recorder import record_fixtures

    try:
        written = record_fixtures(args.requests, args.out)
    except OSError as exc:
        print(f"io failure: {exc}", file=sys.stderr)
        return 1
    print(f"recorded {written} fixtures to {args.out}")
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
