"""
Command registry
Centralized list of the CLI subcommands, imported lazily when the root group is built
"""

from typing import List

import click


class CommandConfig:
    """Command configuration class"""
    def __init__(self, module_path: str, attribute: str, name: str):
        self.module_path = module_path
        self.attribute = attribute
        self.name = name


COMMANDS = [
    CommandConfig(module_path="app.api.commands.generate", attribute="gen", name="gen"),
    CommandConfig(module_path="app.api.commands.generate", attribute="measure", name="measure"),
    CommandConfig(module_path="app.api.commands.quorum", attribute="certify", name="certify"),
    CommandConfig(module_path="app.api.commands.quorum", attribute="design", name="design"),
    CommandConfig(module_path="app.api.commands.reconstruct", attribute="reconstruct", name="reconstruct"),
    CommandConfig(module_path="app.api.commands.reconstruct", attribute="partners", name="partners"),
    CommandConfig(module_path="app.api.commands.reconstruct", attribute="uniqueness", name="uniqueness"),
    CommandConfig(module_path="app.api.commands.indirect", attribute="indirect", name="indirect"),
    CommandConfig(module_path="app.api.commands.indirect", attribute="consistency", name="consistency"),
    CommandConfig(module_path="app.api.commands.dynamics", attribute="dynamics", name="dynamics"),
    CommandConfig(module_path="app.api.commands.particle", attribute="particle_demo", name="particle-demo"),
    CommandConfig(module_path="app.api.commands.selftest", attribute="selftest", name="selftest"),
]


def register_commands(group: click.Group, command_configs: List[CommandConfig]):
    """
    Dynamically register commands

    Args:
        group: root click group
        command_configs: List of command configurations
    """
    for command_config in command_configs:
        module_name = command_config.module_path.split('.')[-1]
        module = __import__(command_config.module_path, fromlist=[module_name])
        group.add_command(getattr(module, command_config.attribute), name=command_config.name)


def get_commands() -> List[CommandConfig]:
    """Get command configuration"""
    return COMMANDS
