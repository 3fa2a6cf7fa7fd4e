from .artifact_manager import ArtifactManager, read_yaml
from .resource_manager import ResourceMonitor, ResourceSnapshot

__all__ = [
    'ArtifactManager',
    'ResourceMonitor',
    'ResourceSnapshot',
    'read_yaml',
]
