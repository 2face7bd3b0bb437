"""Operator service: live paced simulation behind a web socket."""
