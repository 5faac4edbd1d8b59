import typing as t

from wtforms import Field
from wtforms import Form
from wtforms.validators import StopValidation
from wtforms.validators import ValidationError

from ..babel import gettext


class ListInputRequired:
    """
    Validates that at least one item was provided for a list field.
    """

    field_flags = {"required": True}

    def __call__(self, form: Form, field: Field) -> None:
        entries = getattr(field, "entries", None)
        items = entries if entries is not None else field.data
        if not items:
            field.errors[:] = []  # type: ignore[index]
            raise StopValidation(gettext("This field requires at least one item."))


class OptionalValue:
    """
    Stops the validation chain when no value was given.

    Unlike :class:`wtforms.validators.Optional` this works on forms built
    from mappings rather than request data, and keeps conversion errors.
    """

    field_flags = {"optional": True}

    def __call__(self, form: Form, field: Field) -> None:
        if field.data is None or field.data == "":
            raise StopValidation()


class NotGreaterThan:
    """
    Compares the field with another field of the same form.

    :param fieldname:
        The name of the upper-bound field.
    """

    def __init__(self, fieldname: str) -> None:
        self.fieldname = fieldname

    def __call__(self, form: Form, field: Field) -> None:
        other = form._fields.get(self.fieldname)
        if other is None:
            raise ValidationError(f"Invalid field name '{self.fieldname}'.")
        if field.data is None or other.data is None:
            return
        if field.data > other.data:
            raise ValidationError(
                gettext("Must not exceed %(other)s.", other=self.fieldname)
            )


class OpenUnitInterval:
    """
    The value must lie strictly between 0 and 1.
    """

    def __call__(self, form: Form, field: Field) -> None:
        if field.data is None or not 0.0 < field.data < 1.0:
            raise ValidationError(gettext("Must be strictly between 0 and 1."))


class ExclusiveWith:
    """
    The field and ``fieldname`` must not both be true.
    """

    def __init__(self, fieldname: str) -> None:
        self.fieldname = fieldname

    def __call__(self, form: Form, field: Field) -> None:
        other = form._fields.get(self.fieldname)
        if field.data and other is not None and other.data:
            raise ValidationError(
                gettext("Cannot be combined with %(other)s.", other=self.fieldname)
            )


class Callback:
    """
    Runs ``check(field.data)`` and turns the listed exceptions into
    validation errors.
    """

    def __init__(
        self,
        check: t.Callable[[t.Any], t.Any],
        errors: tuple[type[Exception], ...] = (ValueError,),
    ) -> None:
        self.check = check
        self.errors = errors

    def __call__(self, form: Form, field: Field) -> None:
        try:
            self.check(field.data)
        except self.errors as ex:
            raise ValidationError(str(ex)) from ex
