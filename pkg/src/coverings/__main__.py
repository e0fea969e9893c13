from coverings.cli import main

main()
