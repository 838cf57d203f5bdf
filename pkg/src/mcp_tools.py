"""
MCP tool server exposing the toolkit actions over SSE.

Every coroutine named ``*_action`` in ``src.actions`` becomes a tool named
``*_tool``. Server-held objects (currently the ``Settings``) are injected into
actions that declare a parameter of the same name and hidden from the tool
schema.
"""

import hmac
import importlib
import inspect
import logging
import pkgutil
import uuid
from typing import Any, Callable, Iterator, Optional, TypeVar

from mcp.server.fastmcp import FastMCP
from mcp.server.sse import SseServerTransport
from starlette.applications import Starlette
from starlette.middleware import Middleware
from starlette.middleware.base import BaseHTTPMiddleware
from starlette.requests import Request
from starlette.responses import JSONResponse, Response
from starlette.routing import Mount, Route

from . import __version__, actions
from .config import Settings, load_config

# Server-supplied objects, injected into actions by parameter name
DEPENDENCIES: dict[str, object] = {}

# Routes served without an API key
OPEN_PATHS = frozenset({"/health"})

T = TypeVar("T")
logger = logging.getLogger(__name__)


class APIKeyMiddleware(BaseHTTPMiddleware):
    """Reject requests whose ``X-API-Key`` header does not match the server key."""

    def __init__(self, app, api_key: str):
        super().__init__(app)
        if not api_key:
            raise ValueError("APIKeyMiddleware needs a non-empty API key")
        self.api_key = api_key.encode()

    def authorized(self, request: Request) -> bool:
        supplied = request.headers.get("X-API-Key", "").encode()
        return hmac.compare_digest(supplied, self.api_key)

    async def dispatch(self, request: Request, call_next):
        request_id = str(uuid.uuid4())
        path = request.url.path
        logger.info(f"[{request_id}] {request.method} {path}")

        if path in OPEN_PATHS:
            return await call_next(request)

        if not self.authorized(request):
            logger.warning(f"[{request_id}] Unauthorized: Invalid API key")
            return JSONResponse({"error": "Unauthorized"}, status_code=401)

        response = await call_next(request)
        logger.info(f"[{request_id}] Completed with status {response.status_code}")
        return response


class MCPServer:
    """FastMCP instance plus the Starlette app that serves it over SSE."""

    def __init__(self, api_key: str, service_name: str = "noisygt"):
        self.service_name = service_name
        self.api_key = api_key
        self.mcp = FastMCP(service_name)
        self.sse = SseServerTransport("/messages/")
        logger.info(f"Initialized MCP server: {service_name}")

    def register_tool(self, func: Callable[..., T]) -> Callable[..., T]:
        """Register a function as an MCP tool."""
        logger.info(f"Registering MCP tool: {func.__name__}")
        return self.mcp.tool()(func)

    async def handle_sse(self, request: Request) -> Response:
        request_id = str(uuid.uuid4())

        # Probes (HEAD / OPTIONS) get a plain answer instead of a stream
        if request.method in {"HEAD", "OPTIONS"}:
            return JSONResponse({"status": "ok"}, status_code=200)

        logger.info(f"[{request_id}] SSE connection established")
        server = self.mcp._mcp_server
        try:
            async with self.sse.connect_sse(
                request.scope, request.receive, request._send
            ) as (read_stream, write_stream):
                await server.run(
                    read_stream, write_stream, server.create_initialization_options()
                )
        except Exception as e:
            logger.error(f"[{request_id}] SSE error: {str(e)}", exc_info=True)
            raise
        finally:
            logger.info(f"[{request_id}] SSE connection closed")
        return Response()

    async def handle_health(self, request: Request) -> JSONResponse:
        return JSONResponse(
            {"status": "healthy", "service": self.service_name, "version": __version__}
        )

    def create_app(self, debug: bool = False) -> Starlette:
        """Starlette app with ``/health`` open and ``/sse`` plus ``/messages/`` behind the key."""
        app = Starlette(
            debug=debug,
            routes=[
                Route("/health", endpoint=self.handle_health),
                Route("/sse", endpoint=self.handle_sse, methods=["GET", "HEAD", "OPTIONS"]),
                Mount("/messages/", app=self.sse.handle_post_message),
            ],
            middleware=[Middleware(APIKeyMiddleware, api_key=self.api_key)],
        )
        logger.info("Starlette application created")
        return app


def tool_name(action_name: str) -> str:
    return action_name.removesuffix("_action") + "_tool"


def make_wrapper(action_func: Callable[..., Any]) -> Callable[..., Any]:
    """
    Tool coroutine around ``action_func``.

    Parameters named after an entry of ``DEPENDENCIES`` are bound to that
    entry and dropped from the visible signature and annotations.
    """
    sig = inspect.signature(action_func)
    injected = {name: value for name, value in DEPENDENCIES.items() if name in sig.parameters}

    async def wrapper(**kwargs):
        return await action_func(**kwargs, **injected)

    wrapper.__name__ = tool_name(action_func.__name__)
    wrapper.__doc__ = action_func.__doc__
    wrapper.__signature__ = sig.replace(
        parameters=[p for p in sig.parameters.values() if p.name not in injected]
    )
    wrapper.__annotations__ = {
        key: value
        for key, value in getattr(action_func, "__annotations__", {}).items()
        if key not in injected
    }
    return wrapper


def iter_actions() -> Iterator[tuple[str, Callable[..., Any]]]:
    """(name, coroutine) for every ``*_action`` in the actions package."""
    for _, module_name, _ in pkgutil.iter_modules(actions.__path__):
        try:
            mod = importlib.import_module(f".actions.{module_name}", package=__package__)
        except Exception as e:
            logger.error(f"Failed to load action module {module_name}: {str(e)}", exc_info=True)
            raise
        logger.debug(f"Loaded action module: {module_name}")

        for name, func in inspect.getmembers(mod, inspect.iscoroutinefunction):
            if name.endswith("_action"):
                yield name, func


def register_tools(mcp_server: MCPServer, settings: Optional[Settings] = None) -> list[str]:
    """
    Register every discovered action as a tool.

    Returns:
        The registered tool names.
    """
    DEPENDENCIES["settings"] = settings if settings is not None else load_config()

    logger.info("Starting auto-discovery of action modules")
    registered = []
    for name, func in iter_actions():
        logger.info(f"Registering action: {name}")
        tool = make_wrapper(func)
        mcp_server.register_tool(tool)
        registered.append(tool.__name__)

    logger.info(f"Registered {len(registered)} tools")
    return registered
