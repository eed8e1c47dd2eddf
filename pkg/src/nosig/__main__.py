from nosig.cli import main

main()
