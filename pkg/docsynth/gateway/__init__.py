# flake8: noqa
from .client import ChatRequest
from .client import Completion
from .client import GatewayConfig
from .client import LLMGateway
from .client import TokenUsage
from .client import UsageMeter
from .fences import extract_json_fence
from .fences import iter_fences
from .fences import wrap_in_fence
from .replay import ReplayStore
