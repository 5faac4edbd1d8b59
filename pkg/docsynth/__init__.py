__version__ = "0.3.0"
__author__ = "DocSynth team"


from .config import PipelineConfig  # noqa: F401
from .config import load_config  # noqa: F401
from .corpus import QaRecord  # noqa: F401
from .gateway import GatewayConfig  # noqa: F401
from .gateway import LLMGateway  # noqa: F401
from .runner import run  # noqa: F401
