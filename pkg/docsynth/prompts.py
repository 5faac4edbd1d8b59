import json
import typing as t

from jinja2 import Environment
from jinja2 import PackageLoader
from jinja2 import StrictUndefined
from jinja2 import UndefinedError
from jinja2 import select_autoescape

from .exceptions import PromptError

LANGUAGE_NAMES = {"zh": "Chinese", "en": "English"}

env = Environment(
    loader=PackageLoader("docsynth", "templates"),
    autoescape=select_autoescape(enabled_extensions=("svg",), default_for_string=False),
    undefined=StrictUndefined,
    keep_trailing_newline=True,
    trim_blocks=True,
    lstrip_blocks=True,
)


def as_prompt_text(value: t.Any) -> str:
    """
    Text substituted for a placeholder: strings as they are, anything else
    as compact JSON.
    """
    if isinstance(value, str):
        return value
    return json.dumps(value, ensure_ascii=False)


def _is_empty(value: t.Any) -> bool:
    if value is None:
        return True
    if isinstance(value, (str, list, tuple, dict, set, frozenset)):
        return len(value) == 0 if not isinstance(value, str) else not value.strip()
    return False


def render_prompt(name: str, **context: t.Any) -> str:
    """
    Render ``prompts/<name>.txt``.

    Every context value must be non-empty; an empty value is reported the
    same way as a missing one.

    :raises PromptError:
        ``placeholder {x} unfilled``.
    """
    for key, value in context.items():
        if _is_empty(value):
            raise PromptError(f"placeholder {{{key}}} unfilled")

    template = env.get_template(f"prompts/{name}.txt")
    try:
        return template.render({k: as_prompt_text(v) for k, v in context.items()})
    except UndefinedError as ex:
        raise PromptError(f"placeholder unfilled: {ex.message}") from ex


def language_name(code: str) -> str:
    return LANGUAGE_NAMES.get(code, code)
