"""Marshmallow extension"""

import marshmallow as ma


class Schema(ma.Schema):
    """Base Schema class for every JSON file read or written"""

    # Ensures the fields are ordered
    set_class = ma.orderedset.OrderedSet
