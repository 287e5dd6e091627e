from .harness.control import OEMDEControl


def main(argv=None) -> int:
    return OEMDEControl().invoke(argv)


if __name__ == '__main__':
    import sys

    sys.exit(main())
