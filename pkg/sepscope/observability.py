"""Logging and tracing setup.

Tracing follows the ENABLE_TRACING switch: when on, logging drops to DEBUG and
an OpenTelemetry tracer provider prints finished spans to stderr. When off,
`tracer()` hands out the API's no-op tracer.
"""

import logging
import sys

from opentelemetry import trace
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import ConsoleSpanExporter, SimpleSpanProcessor

from . import config

_configured = False


def configure(level: str | None = None, tracing: bool | None = None) -> None:
    """Configures root logging and, optionally, span export. Idempotent."""
    global _configured
    if _configured:
        return

    tracing = config.ENABLE_TRACING if tracing is None else tracing
    if tracing:
        logging.basicConfig(level=logging.DEBUG, stream=sys.stderr)
        provider = TracerProvider()
        provider.add_span_processor(SimpleSpanProcessor(ConsoleSpanExporter(out=sys.stderr)))
        trace.set_tracer_provider(provider)
        logging.getLogger(__name__).debug("🔍 Observability enabled: spans exported to stderr.")
    else:
        logging.basicConfig(level=getattr(logging, level or config.LOG_LEVEL, logging.INFO), stream=sys.stderr)
    _configured = True


def tracer(name: str) -> trace.Tracer:
    return trace.get_tracer(name)
