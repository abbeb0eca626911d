from dataclasses import dataclass


@dataclass
class TrainConfig:
    depth: int = 8
    width: int = 64
    batch_size: int = 32
    learning_rate: float = 1e-4
    color_weight: float = 2.0  # weight of the color-angle term in the loss
    nu: float = 6.0  # code threshold below which a pixel may be noise
    bn_enabled: bool = True
    iterations: int = 2000
    seed: int = 0
    patch_size: int = 64
    augment: bool = True  # random mirror + crop
    weight_on: str = "zi"  # noise weight reference: "zi" or "z1"

    def __post_init__(self):
        if self.color_weight < 0:
            raise ValueError("color_weight must be >= 0")
        if self.nu <= 0:
            raise ValueError("nu must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.depth < 1 or self.width < 1:
            raise ValueError("depth and width must be >= 1")
        if self.weight_on not in ("zi", "z1"):
            raise ValueError(f"weight_on must be 'zi' or 'z1', got {self.weight_on!r}")
