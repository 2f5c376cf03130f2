#!/usr/bin/env python3
"""Regenerate the frozen AlexNet-shaped preset table.

Prints one (multiply-accumulate count, input feature count, parameter count)
triple per layer, computed from the standard grouped-convolution
architecture: 227x227x3 input, five convolutional layers (3x3/2 max-pool
after layers 1, 2 and 5), then 4096-4096-1000 fully connected. Compare the
output against ALEXNET_TABLE in src/edgesplit/model_graph.py; the derivation
is documented in docs/alexnet_preset.md.
"""

# (kernel, stride, pad, out_channels, groups)
CONVS = [
    (11, 4, 0, 96, 1),
    (5, 1, 2, 256, 2),
    (3, 1, 1, 384, 1),
    (3, 1, 1, 384, 2),
    (3, 1, 1, 256, 2),
]
POOL_AFTER = {1, 2, 5}
FC_WIDTHS = (4096, 4096, 1000)


def main():
    side, channels = 227, 3
    rows = []
    for idx, (k, stride, pad, out_ch, groups) in enumerate(CONVS, start=1):
        in_values = side * side * channels
        out_side = (side + 2 * pad - k) // stride + 1
        fan_in = k * k * (channels // groups)
        rows.append((out_side * out_side * out_ch * fan_in, in_values, out_ch * (fan_in + 1)))
        side, channels = out_side, out_ch
        if idx in POOL_AFTER:
            side = (side - 3) // 2 + 1
    width = side * side * channels
    for out_width in FC_WIDTHS:
        rows.append((width * out_width, width, width * out_width + out_width))
        width = out_width

    print("ALEXNET_TABLE = (")
    for maccs, in_values, params in rows:
        print(f"    ({maccs}, {in_values}, {params}),")
    print(")")
    print(f"ALEXNET_EXIT_VALUES = {width}")
    print(f"# total parameters: {sum(p for _, _, p in rows):,}")


if __name__ == "__main__":
    main()
